#pragma once

#include <cstddef>
#include <map>
#include <shared_mutex>
#include <string>
#include <variant>
#include <vector>

#include "cosm/policy/policy.hpp"

namespace cosm::policy {

struct SetSuit {
  std::string suit;
};
struct SetRuleAt {
  std::size_t index;
  Rule rule;
};
struct SetActionAt {
  std::size_t index;
  ActionList actions;
};
struct SetElseActionAt {
  std::size_t index;
  ActionList actions;
};

using PolicyMutation = std::variant<SetSuit, SetRuleAt, SetActionAt, SetElseActionAt>;

/// Associative policy store: each key is held at most once and re-adding a
/// key replaces its policy. Reads may run concurrently with each other.
class PolicyRepository {
 public:
  PolicyRepository() = default;
  PolicyRepository(const PolicyRepository& other);
  PolicyRepository& operator=(const PolicyRepository& other);

  void add_policy(DecisionPolicy p);
  void remove_policy(const std::string& id);
  DecisionPolicy get_policy_for_key(const std::string& id) const;
  bool contains(const std::string& id) const;
  void update_policy(const std::string& id, const PolicyMutation& mutation);

  std::vector<std::string> keys() const;
  std::size_t size() const;

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::string, DecisionPolicy, std::less<>> policies_;
};

}  // namespace cosm::policy
