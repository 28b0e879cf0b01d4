#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ergconc {

// Exit/status codes shared by the C API and the CLI.
enum class Status : int {
  kOk = 0,
  kConfig = 1,
  kDivergence = 2,
  kIo = 3,
  kDomain = 4,
  kInternal = 5,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual Status status() const noexcept { return Status::kInternal; }
};

// Invalid argument to a numerical routine (rho <= 1, negative xi, ...).
class DomainError : public Error {
 public:
  using Error::Error;
  Status status() const noexcept override { return Status::kDomain; }
};

// Configuration problem; `field` names the offending JSON field when known.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }
  Status status() const noexcept override { return Status::kConfig; }

 private:
  std::string field_;
};

class IoError : public Error {
 public:
  using Error::Error;
  Status status() const noexcept override { return Status::kIo; }
};

// A path left the stability region: non-finite state or |X_k| > limit.
class DivergenceError : public Error {
 public:
  DivergenceError(std::uint64_t step, std::uint64_t replicate, double norm)
      : Error("path diverged at step " + std::to_string(step) +
              " (replicate " + std::to_string(replicate) +
              ", |x| = " + std::to_string(norm) + ")"),
        step_(step),
        replicate_(replicate) {}
  std::uint64_t step() const noexcept { return step_; }
  std::uint64_t replicate() const noexcept { return replicate_; }
  Status status() const noexcept override { return Status::kDivergence; }

 private:
  std::uint64_t step_;
  std::uint64_t replicate_;
};

}  // namespace ergconc
