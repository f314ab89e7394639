#pragma once

#include <stdexcept>
#include <string>

namespace funnel {

/// Error taxonomy shared by the funnel queue, the oracle and the harness.
enum class errc {
  overflow,       // capacity reached
  empty,          // operation needs at least one item
  not_found,      // unknown item id
  domain,         // argument outside the operation's domain
  configuration,  // invalid construction parameters
  index,          // heap index out of range
  capacity,       // common-heap array exhausted
  io,
};

inline const char* to_string(errc code) noexcept {
  switch (code) {
    case errc::overflow: return "overflow";
    case errc::empty: return "empty";
    case errc::not_found: return "not_found";
    case errc::domain: return "domain";
    case errc::configuration: return "configuration";
    case errc::index: return "index";
    case errc::capacity: return "capacity";
    case errc::io: return "io";
  }
  return "unknown";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

}  // namespace funnel
