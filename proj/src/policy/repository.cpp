#include "cosm/policy/repository.hpp"

#include <mutex>

#include "cosm/error.hpp"

namespace cosm::policy {

namespace {

void require_valid(const DecisionPolicy& p) {
  const auto problems = validate(p);
  if (!problems.empty()) throw Error(ErrorCode::invalid_policy, "policy '" + p.id + "': " + problems.front());
}

}  // namespace

PolicyRepository::PolicyRepository(const PolicyRepository& other) {
  std::shared_lock lock(other.mutex_);
  policies_ = other.policies_;
}

PolicyRepository& PolicyRepository::operator=(const PolicyRepository& other) {
  if (this == &other) return *this;
  std::map<std::string, DecisionPolicy, std::less<>> copy;
  {
    std::shared_lock lock(other.mutex_);
    copy = other.policies_;
  }
  std::unique_lock lock(mutex_);
  policies_ = std::move(copy);
  return *this;
}

void PolicyRepository::add_policy(DecisionPolicy p) {
  require_valid(p);
  std::unique_lock lock(mutex_);
  auto id = p.id;
  policies_.insert_or_assign(std::move(id), std::move(p));
}

void PolicyRepository::remove_policy(const std::string& id) {
  std::unique_lock lock(mutex_);
  policies_.erase(id);
}

DecisionPolicy PolicyRepository::get_policy_for_key(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = policies_.find(id);
  if (it == policies_.end()) throw Error(ErrorCode::policy_not_found, "no policy '" + id + "'");
  return it->second;
}

bool PolicyRepository::contains(const std::string& id) const {
  std::shared_lock lock(mutex_);
  return policies_.contains(id);
}

void PolicyRepository::update_policy(const std::string& id, const PolicyMutation& mutation) {
  std::unique_lock lock(mutex_);
  auto it = policies_.find(id);
  if (it == policies_.end()) throw Error(ErrorCode::policy_not_found, "no policy '" + id + "'");
  DecisionPolicy updated = it->second;
  auto check_index = [&](std::size_t index) {
    if (index >= updated.rules.size())
      throw Error(ErrorCode::index_out_of_range, "policy '" + id + "' has " + std::to_string(updated.rules.size()) +
                                                     " rules, index " + std::to_string(index));
  };
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, SetSuit>) {
          updated.suit = m.suit;
        } else if constexpr (std::is_same_v<M, SetRuleAt>) {
          check_index(m.index);
          updated.rules[m.index] = m.rule;
        } else if constexpr (std::is_same_v<M, SetActionAt>) {
          check_index(m.index);
          updated.rules[m.index].action = m.actions;
        } else {
          check_index(m.index);
          updated.rules[m.index].else_action = m.actions;
        }
      },
      mutation);
  require_valid(updated);
  it->second = std::move(updated);
}

std::vector<std::string> PolicyRepository::keys() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [k, _] : policies_) out.push_back(k);
  return out;
}

std::size_t PolicyRepository::size() const {
  std::shared_lock lock(mutex_);
  return policies_.size();
}

}  // namespace cosm::policy
