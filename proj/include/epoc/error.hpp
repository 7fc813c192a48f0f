#ifndef EPOC_ERROR_HPP
#define EPOC_ERROR_HPP

#include <stdexcept>
#include <string>

namespace epoc {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments, contract violations and malformed in-memory data.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// File system failures (missing file, short write, ...).
class IoError : public Error {
 public:
  using Error::Error;
};

enum class FormatFault {
  bad_magic,
  truncated,
  dimension_overflow,
  id_out_of_range,
  unsupported,
};

inline const char* to_string(FormatFault fault) {
  switch (fault) {
    case FormatFault::bad_magic: return "bad magic";
    case FormatFault::truncated: return "truncated payload";
    case FormatFault::dimension_overflow: return "dimension overflow";
    case FormatFault::id_out_of_range: return "id out of range";
    case FormatFault::unsupported: return "unsupported format";
  }
  return "unknown";
}

/// A file was readable but its content violates the on-disk format.
class FormatError : public IoError {
 public:
  FormatError(FormatFault fault, const std::string& where)
      : IoError(where + ": " + to_string(fault)), fault_(fault) {}

  FormatFault fault() const noexcept { return fault_; }

 private:
  FormatFault fault_;
};

}  // namespace epoc

#endif  // EPOC_ERROR_HPP
