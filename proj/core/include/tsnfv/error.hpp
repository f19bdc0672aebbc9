// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace tsnfv {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input documents.
class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// Time arithmetic.
class HyperperiodOverflow : public Error {
 public:
  using Error::Error;
};

// Routing.
class NoPath : public Error {
 public:
  using Error::Error;
};

class UnmappedDomain : public Error {
 public:
  using Error::Error;
};

class UnplacedMember : public Error {
 public:
  using Error::Error;
};

/// A station or bridge lacks a capability the stream needs.
class CapabilityError : public Error {
 public:
  CapabilityError(std::string station, std::string flag)
      : Error("capability '" + flag + "' missing on " + station),
        station_(std::move(station)),
        flag_(std::move(flag)) {}

  const std::string& station() const noexcept { return station_; }
  const std::string& flag() const noexcept { return flag_; }

 private:
  std::string station_;
  std::string flag_;
};

enum class InfeasibleCause {
  exceeds_budget,
  no_free_window,
  gcl_overflow,
};

std::string to_string(InfeasibleCause cause);

/// Admission of a stream onto a segment failed; the CNC state is unchanged.
class InfeasibleError : public Error {
 public:
  InfeasibleError(InfeasibleCause cause, const std::string& what)
      : Error(what), cause_(cause) {}

  InfeasibleCause cause() const noexcept { return cause_; }

 private:
  InfeasibleCause cause_;
};

class GclOverflow : public Error {
 public:
  GclOverflow(std::string port_id, std::size_t entries, int limit)
      : Error("gate control list of " + port_id + " needs " +
              std::to_string(entries) + " entries, bridge supports " +
              std::to_string(limit)),
        port_id_(std::move(port_id)) {}

  const std::string& port_id() const noexcept { return port_id_; }

 private:
  std::string port_id_;
};

class UnknownStream : public Error {
 public:
  using Error::Error;
};

// NS lifecycle.
class UnknownInstance : public Error {
 public:
  using Error::Error;
};

class AlreadyTerminated : public Error {
 public:
  using Error::Error;
};

class InstanceNotActive : public Error {
 public:
  using Error::Error;
};

class AdmissionFailed : public Error {
 public:
  AdmissionFailed(std::string instance_id, std::string stream_id,
                  std::string domain_id, std::string cause,
                  const std::string& detail)
      : Error("admission of " + stream_id + " failed in domain " + domain_id +
              " (" + cause + "): " + detail),
        instance_id_(std::move(instance_id)),
        stream_id_(std::move(stream_id)),
        domain_id_(std::move(domain_id)),
        cause_(std::move(cause)) {}

  const std::string& instance_id() const noexcept { return instance_id_; }
  const std::string& stream_id() const noexcept { return stream_id_; }
  const std::string& domain_id() const noexcept { return domain_id_; }
  const std::string& cause() const noexcept { return cause_; }

 private:
  std::string instance_id_;
  std::string stream_id_;
  std::string domain_id_;
  std::string cause_;
};

class UpdateFailed : public Error {
 public:
  using Error::Error;
};

// UNI.
class DecodeError : public Error {
 public:
  using Error::Error;
};

class UnknownDomain : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

class BindError : public Error {
 public:
  using Error::Error;
};

// Verification.
class SimConfigError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace tsnfv
