#pragma once

#include <stdexcept>
#include <string>

namespace gibbsnet {

// Root of every exception the library throws on a contract violation or a
// numerical failure. Programming errors on shapes are reported the same way.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

}  // namespace gibbsnet
