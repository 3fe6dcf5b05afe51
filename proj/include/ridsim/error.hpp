#pragma once

#include <stdexcept>
#include <string>

namespace ridsim {

// Base of every error raised by the library. The CLI maps subclasses to exit
// codes, so keep the hierarchy flat.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotCoprime : public Error {
 public:
  using Error::Error;
};

class InvalidModulus : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class EmptyWindow : public Error {
 public:
  using Error::Error;
};

class ZeroDistance : public Error {
 public:
  using Error::Error;
};

class SenderUnreachable : public Error {
 public:
  using Error::Error;
};

class ConstraintViolation : public Error {
 public:
  ConstraintViolation(std::string constraint, int uav_id)
      : Error("constraint '" + constraint + "' violated by UAV " + std::to_string(uav_id)),
        constraint_(std::move(constraint)),
        uav_id_(uav_id) {}

  const std::string& constraint() const noexcept { return constraint_; }
  int uav_id() const noexcept { return uav_id_; }

 private:
  std::string constraint_;
  int uav_id_;
};

class TooLarge : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class NonFiniteLoss : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ridsim
