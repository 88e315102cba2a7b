#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace rattack {

// Node ids are 1-based, matching the external JSON format.
using NodeId = int;
// Index into Network::links(); links are kept sorted by (tail, head), so a
// lower LinkId is also the lexicographically lower link.
using LinkId = std::size_t;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Absolute tolerance for rate/ratio equality.
inline constexpr double kTolerance = 1e-9;

inline bool is_infinite(double value) { return std::isinf(value) && value > 0; }

// Relative tie window used by every argmax/argmin so that mathematically
// equal scores computed along different floating-point paths still tie.
inline bool strictly_greater(double lhs, double rhs) {
  if (is_infinite(rhs)) return false;
  if (is_infinite(lhs)) return true;
  return lhs > rhs + 1e-12 * std::max(1.0, std::fabs(rhs));
}

inline bool nearly_equal(double lhs, double rhs) {
  return !strictly_greater(lhs, rhs) && !strictly_greater(rhs, lhs);
}

/// Domain error carrying a short machine-readable code and, when relevant,
/// the node or link it refers to.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message,
        std::optional<NodeId> node = std::nullopt,
        std::optional<std::pair<NodeId, NodeId>> link = std::nullopt)
      : std::runtime_error(message),
        code_(std::move(code)),
        node_(node),
        link_(link) {}

  const std::string& code() const { return code_; }
  const std::optional<NodeId>& node() const { return node_; }
  const std::optional<std::pair<NodeId, NodeId>>& link() const { return link_; }

  /// `ERROR <code>: <message> [node=..|link=..]`
  std::string format() const {
    std::string out = "ERROR " + code_ + ": " + what();
    if (node_) out += " [node=" + std::to_string(*node_) + "]";
    if (link_) {
      out += " [link=" + std::to_string(link_->first) + "," +
             std::to_string(link_->second) + "]";
    }
    return out;
  }

 private:
  std::string code_;
  std::optional<NodeId> node_;
  std::optional<std::pair<NodeId, NodeId>> link_;
};

}  // namespace rattack
