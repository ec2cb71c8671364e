#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

// Index arithmetic for the regular binary tree. Nodes are the positive
// integers in heap order: root 1, children of n are 2n and 2n+1. Generation r
// is the label range [2^r, 2^{r+1}) and a depth-m subtree is [1, 2^{m+1}).

namespace bifurcate::tree {

using NodeId = std::uint64_t;

// Generations beyond this would make subtree storage explode; reject early.
inline constexpr int kMaxGeneration = 40;

// Materializing a member list larger than this is refused; stream instead.
inline constexpr std::uint64_t kMaxMaterialize = std::uint64_t{1} << 27;

struct root_has_no_path : std::invalid_argument {
  root_has_no_path() : std::invalid_argument("root has no path") {}
};

int generation(NodeId n);                  // floor(log2 n)
NodeId parent(NodeId n);                   // n >= 2
std::uint64_t generation_size(int m);      // 2^m
std::uint64_t subtree_size(int m);         // 2^{m+1} - 1
void check_generation(int m);              // throws outside [0, kMaxGeneration]

// A set of node labels: one generation, a whole subtree, or an explicit list.
// Iteration is lazy; nothing is materialized unless members() is called.
class IndexSet {
 public:
  enum class Kind { Generation, Subtree, Explicit };

  static IndexSet generation(int m);
  static IndexSet subtree(int m);
  static IndexSet explicit_set(std::vector<NodeId> nodes);  // dedup + sort

  Kind kind() const { return kind_; }
  int level() const { return level_; }  // m for Generation/Subtree kinds
  std::uint64_t size() const;
  NodeId max_node() const;
  std::string describe() const;

  template <class F>
  void for_each(F&& fn) const {
    switch (kind_) {
      case Kind::Generation: {
        const NodeId lo = NodeId{1} << level_;
        for (NodeId n = lo; n < 2 * lo; ++n) fn(n);
        break;
      }
      case Kind::Subtree: {
        const NodeId end = (NodeId{2} << level_);
        for (NodeId n = 1; n < end; ++n) fn(n);
        break;
      }
      case Kind::Explicit:
        for (NodeId n : nodes_) fn(n);
        break;
    }
  }

  std::vector<NodeId> members() const;

 private:
  Kind kind_;
  int level_ = 0;
  std::vector<NodeId> nodes_;
};

// The root-to-n path: bits_[i-1] is the type (0/1) of the ancestor of n in
// generation i, and type1_suffix_counts_[k] counts type-1 ancestors among the
// last k generations of the path (index 0 is always 0).
struct AncestryPath {
  std::vector<int> bits;                 // z_1 .. z_{r_n}
  std::vector<int> type1_suffix_counts;  // a_0 .. a_{r_n - 1}
};

AncestryPath ancestry(NodeId n);  // throws root_has_no_path for n == 1

}  // namespace bifurcate::tree
