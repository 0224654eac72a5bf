#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace wifico {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Line-level failure while reading an input file.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class RegistryMissError : public Error {
 public:
  explicit RegistryMissError(const std::string& ap_id)
      : Error("access point not registered: " + ap_id), ap_id_(ap_id) {}

  const std::string& ap_id() const { return ap_id_; }

 private:
  std::string ap_id_;
};

// Cross-reference failure; carries every offender, not just the first.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& what, std::vector<std::string> offenders)
      : Error(format(what, offenders)), offenders_(std::move(offenders)) {}

  const std::vector<std::string>& offenders() const { return offenders_; }

 private:
  static std::string format(const std::string& what,
                            const std::vector<std::string>& offenders) {
    std::string out = what;
    for (const auto& o : offenders) out += "\n  " + o;
    return out;
  }

  std::vector<std::string> offenders_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace wifico
