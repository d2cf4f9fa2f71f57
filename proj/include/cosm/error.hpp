#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cosm {

enum class ErrorCode {
  // adl
  malformed_xml,
  schema_violation,
  dangling_reference,
  duplicate_id,
  missing_factory,
  factory_mismatch,
  // kernel
  component_not_found,
  no_such_method,
  does_not_recognize_selector,
  unknown_target,
  // context
  unknown_entity,
  // policy
  invalid_policy,
  policy_not_found,
  index_out_of_range,
  unbound_external_variable,
  type_error,
  chain_depth_exceeded,
  // adaptation
  unresolvable_target,
  verification_failed,
  unverified_plan,
  action_failure,
  // ecampus / harness
  no_active_location_layer,
  parse_error,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cosm
