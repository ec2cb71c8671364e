#include "bifurcate/tree.hpp"

#include <algorithm>
#include <bit>

namespace bifurcate::tree {

int generation(NodeId n) {
  if (n == 0) throw std::invalid_argument("node labels start at 1");
  const int g = std::bit_width(n) - 1;
  if (g > kMaxGeneration)
    throw std::invalid_argument("node " + std::to_string(n) + " lies beyond generation " +
                                std::to_string(kMaxGeneration));
  return g;
}

NodeId parent(NodeId n) {
  if (n < 2) throw std::invalid_argument("root has no parent");
  return n / 2;
}

void check_generation(int m) {
  if (m < 0 || m > kMaxGeneration)
    throw std::invalid_argument("generation " + std::to_string(m) + " outside [0, " +
                                std::to_string(kMaxGeneration) + "]");
}

std::uint64_t generation_size(int m) {
  check_generation(m);
  return std::uint64_t{1} << m;
}

std::uint64_t subtree_size(int m) {
  check_generation(m);
  return (std::uint64_t{2} << m) - 1;
}

IndexSet IndexSet::generation(int m) {
  check_generation(m);
  IndexSet s;
  s.kind_ = Kind::Generation;
  s.level_ = m;
  return s;
}

IndexSet IndexSet::subtree(int m) {
  check_generation(m);
  IndexSet s;
  s.kind_ = Kind::Subtree;
  s.level_ = m;
  return s;
}

IndexSet IndexSet::explicit_set(std::vector<NodeId> nodes) {
  if (nodes.empty()) throw std::invalid_argument("explicit index set must be non-empty");
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  for (NodeId n : nodes) bifurcate::tree::generation(n);  // validates labels and the depth cap
  IndexSet s;
  s.kind_ = Kind::Explicit;
  s.nodes_ = std::move(nodes);
  return s;
}

std::uint64_t IndexSet::size() const {
  switch (kind_) {
    case Kind::Generation: return generation_size(level_);
    case Kind::Subtree: return subtree_size(level_);
    case Kind::Explicit: return nodes_.size();
  }
  return 0;
}

NodeId IndexSet::max_node() const {
  switch (kind_) {
    case Kind::Generation: return (NodeId{2} << level_) - 1;
    case Kind::Subtree: return (NodeId{2} << level_) - 1;
    case Kind::Explicit: return nodes_.back();
  }
  return 0;
}

std::string IndexSet::describe() const {
  switch (kind_) {
    case Kind::Generation: return "generation:" + std::to_string(level_);
    case Kind::Subtree: return "subtree:" + std::to_string(level_);
    case Kind::Explicit: return "explicit[" + std::to_string(nodes_.size()) + "]";
  }
  return "";
}

std::vector<NodeId> IndexSet::members() const {
  if (size() > kMaxMaterialize)
    throw std::length_error("index set too large to materialize; use for_each");
  std::vector<NodeId> out;
  out.reserve(size());
  for_each([&](NodeId n) { out.push_back(n); });
  return out;
}

AncestryPath ancestry(NodeId n) {
  if (n == 1) throw root_has_no_path{};
  const int depth = generation(n);
  AncestryPath path;
  path.bits.resize(depth);
  // bit i of the label after the leading 1, i.e. the type of the ancestor in
  // generation i+1
  for (int i = 0; i < depth; ++i)
    path.bits[i] = static_cast<int>((n >> (depth - 1 - i)) & 1U);
  path.type1_suffix_counts.resize(depth);
  path.type1_suffix_counts[0] = 0;
  for (int k = 1; k < depth; ++k)
    path.type1_suffix_counts[k] = path.type1_suffix_counts[k - 1] + path.bits[depth - k];
  return path;
}

}  // namespace bifurcate::tree
