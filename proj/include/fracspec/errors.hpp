#ifndef FRACSPEC_ERRORS_HPP
#define FRACSPEC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fracspec {

/// Argument outside the domain where an operation is defined.
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical procedure failed to reach its tolerance or produced an
/// unusable intermediate (non-convergent quadrature, indefinite embedding).
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range configuration. `key()` names the offending key.
class config_error : public std::runtime_error {
 public:
  config_error(std::string key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace fracspec

#endif  // FRACSPEC_ERRORS_HPP
