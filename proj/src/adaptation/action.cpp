#include "cosm/adaptation/action.hpp"

namespace cosm::adaptation {

namespace {

template <class... F>
struct overloaded : F... {
  using F::operator()...;
};
template <class... F>
overloaded(F...) -> overloaded<F...>;

}  // namespace

std::string describe(const AdaptationAction& action) {
  return std::visit(
      overloaded{
          [](const ActivateLayer& a) { return "activate " + a.component + "." + a.layer; },
          [](const DeactivateLayer& a) { return "deactivate " + a.component + "." + a.layer; },
          [](const LoadComponent& a) { return "load " + a.id; },
          [](const ReplaceComponent& a) { return "replace " + a.old_id + " -> " + a.new_id; },
          [](const RebindDelegate& a) { return "rebind " + a.component + " -> " + a.target; },
          [](const InvokeSelector& a) {
            std::string out = "invoke " + a.component + "." + a.selector + "(";
            for (std::size_t i = 0; i < a.args.size(); ++i) {
              if (i) out += ", ";
              out += to_literal(a.args[i]);
            }
            return out + ")";
          },
      },
      action);
}

}  // namespace cosm::adaptation
