#pragma once

// Index nested-loop enumeration of the tuples of a join tree. Internal to the
// store; tuples are one row pointer per slot, slot 0 being the root relation.

#include <algorithm>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "hof/error.hpp"
#include "hof/store.hpp"

namespace hof::detail {

class JoinScan {
 public:
  using Tuple = std::vector<const Row*>;

  JoinScan(const Store& store, const std::vector<JoinEdge>& path, std::size_t root,
           std::span<const ConstraintAtom> atoms)
      : store_(store) {
    slots_.push_back(root);
    std::vector<bool> used(path.size(), false);
    for (bool grew = true; grew;) {
      grew = false;
      for (std::size_t i = 0; i < path.size(); ++i) {
        if (used[i]) continue;
        const auto& e = path[i];
        const int from_slot = find_slot(e.from.relation);
        const int to_slot = find_slot(e.to.relation);
        if (from_slot < 0 && to_slot < 0) continue;
        const ColumnRef parent = from_slot >= 0 ? e.from : e.to;
        const ColumnRef child = from_slot >= 0 ? e.to : e.from;
        steps_.push_back({static_cast<std::size_t>(from_slot >= 0 ? from_slot : to_slot), parent.column,
                          child.relation, child.column});
        slots_.push_back(child.relation);
        used[i] = true;
        grew = true;
      }
    }
    if (slots_.size() != path.size() + 1) throw Error("join path is not a tree rooted at the scan root");
    stages_.resize(slots_.size());
    for (const auto& atom : atoms) {
      CompiledAtom c;
      c.left_slot = slot(atom.left.relation);
      c.left_column = atom.left.column;
      c.comparator = atom.comparator;
      std::size_t stage = c.left_slot;
      if (const auto* col = std::get_if<ColumnRef>(&atom.right)) {
        c.right_slot = static_cast<int>(slot(col->relation));
        c.right_column = col->column;
        stage = std::max<std::size_t>(stage, static_cast<std::size_t>(c.right_slot));
      } else {
        c.constant = std::get<Value>(atom.right);
      }
      stages_[stage].push_back(std::move(c));
    }
  }

  std::size_t slot(std::size_t relation) const {
    const int s = find_slot(relation);
    if (s < 0) throw Error("column outside the query's join path");
    return static_cast<std::size_t>(s);
  }
  std::size_t width() const { return slots_.size(); }

  /// Visits joined tuples rooted at the given root rows. `f` returns false to stop.
  /// Returns false when stopped early.
  template <class F>
  bool run_rows(std::span<const Row* const> roots, F&& f) const {
    Tuple tuple(slots_.size(), nullptr);
    for (const Row* root : roots) {
      tuple[0] = root;
      if (!passes(0, tuple)) continue;
      if (!descend(1, tuple, f)) return false;
    }
    return true;
  }

  /// Visits every joined tuple, driving from the smallest equality index hit
  /// on the root relation when one exists.
  template <class F>
  bool run_all(F&& f) const {
    const Table& root = store_.table(slots_[0]);
    std::span<const RowId> driver;
    bool driven = false;
    for (const auto& atom : stages_[0]) {
      if (atom.right_slot >= 0 || atom.comparator != Comparator::Eq || !root.indexed(atom.left_column))
        continue;
      const auto hit = root.lookup(atom.left_column, atom.constant);
      if (!driven || hit.size() < driver.size()) driver = hit;
      driven = true;
    }
    Tuple tuple(slots_.size(), nullptr);
    auto visit = [&](RowId id) {
      tuple[0] = &root.row(id);
      if (!passes(0, tuple)) return true;
      return descend(1, tuple, f);
    };
    if (driven) {
      for (RowId id : driver)
        if (!visit(id)) return false;
    } else {
      for (RowId id = 0; id < root.size(); ++id)
        if (!visit(id)) return false;
    }
    return true;
  }

 private:
  struct Step {
    std::size_t parent_slot;
    std::size_t parent_column;
    std::size_t relation;
    std::size_t column;
  };
  struct CompiledAtom {
    std::size_t left_slot = 0;
    std::size_t left_column = 0;
    Comparator comparator = Comparator::Eq;
    int right_slot = -1;
    std::size_t right_column = 0;
    Value constant;
  };

  int find_slot(std::size_t relation) const {
    for (std::size_t i = 0; i < slots_.size(); ++i)
      if (slots_[i] == relation) return static_cast<int>(i);
    return -1;
  }

  bool passes(std::size_t stage, const Tuple& tuple) const {
    for (const auto& a : stages_[stage]) {
      const Value& left = (*tuple[a.left_slot])[a.left_column];
      const Value& right = a.right_slot >= 0 ? (*tuple[a.right_slot])[a.right_column] : a.constant;
      if (!satisfies(compare_values(left, right), a.comparator)) return false;
    }
    return true;
  }

  template <class F>
  bool descend(std::size_t depth, Tuple& tuple, F& f) const {
    if (depth == slots_.size()) return f(static_cast<const Tuple&>(tuple));
    const Step& step = steps_[depth - 1];
    const Table& table = store_.table(step.relation);
    const Value& key = (*tuple[step.parent_slot])[step.parent_column];
    for (RowId id : table.lookup(step.column, key)) {
      tuple[depth] = &table.row(id);
      if (!passes(depth, tuple)) continue;
      if (!descend(depth + 1, tuple, f)) return false;
    }
    return true;
  }

  const Store& store_;
  std::vector<std::size_t> slots_;
  std::vector<Step> steps_;
  std::vector<std::vector<CompiledAtom>> stages_;
};

/// Root relation for scanning `path` under `atoms`: the relation of the most
/// selective indexed equality atom, else `fallback`.
std::size_t choose_root(const Store& store, const std::vector<JoinEdge>& path,
                        std::span<const ConstraintAtom> atoms, std::size_t fallback);

}  // namespace hof::detail
