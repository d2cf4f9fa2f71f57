#include "cosm/error.hpp"

namespace cosm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::malformed_xml: return "malformed-xml";
    case ErrorCode::schema_violation: return "schema-violation";
    case ErrorCode::dangling_reference: return "dangling-reference";
    case ErrorCode::duplicate_id: return "duplicate-id";
    case ErrorCode::missing_factory: return "missing-factory";
    case ErrorCode::factory_mismatch: return "factory-mismatch";
    case ErrorCode::component_not_found: return "component-not-found";
    case ErrorCode::no_such_method: return "no-such-method";
    case ErrorCode::does_not_recognize_selector: return "does-not-recognize-selector";
    case ErrorCode::unknown_target: return "unknown-target";
    case ErrorCode::unknown_entity: return "unknown-entity";
    case ErrorCode::invalid_policy: return "invalid-policy";
    case ErrorCode::policy_not_found: return "policy-not-found";
    case ErrorCode::index_out_of_range: return "index-out-of-range";
    case ErrorCode::unbound_external_variable: return "unbound-external-variable";
    case ErrorCode::type_error: return "type-error";
    case ErrorCode::chain_depth_exceeded: return "chain-depth-exceeded";
    case ErrorCode::unresolvable_target: return "unresolvable-target";
    case ErrorCode::verification_failed: return "verification-failed";
    case ErrorCode::unverified_plan: return "unverified-plan";
    case ErrorCode::action_failure: return "action-failure";
    case ErrorCode::no_active_location_layer: return "no-active-location-layer";
    case ErrorCode::parse_error: return "parse-error";
  }
  return "unknown-error";
}

}  // namespace cosm
