#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "slicescope/schema.hpp"

namespace slicescope {

// One condition: feature takes exactly one value id (category, OTHER or bin).
struct SingletonPredicate {
    uint32_t feature = 0;
    int32_t value = 0;

    friend bool operator==(const SingletonPredicate&, const SingletonPredicate&) = default;
    friend auto operator<=>(const SingletonPredicate&, const SingletonPredicate&) = default;
};

// Canonical conjunction of singleton predicates: sorted by (feature, value),
// at most one singleton per feature. The empty conjunction is the always-true
// predicate whose slice is the whole dataset.
class Predicate {
public:
    Predicate() = default;

    // Sorts and validates; throws std::invalid_argument on a repeated feature.
    static Predicate from_atoms(std::vector<SingletonPredicate> atoms);

    // Canonical conjunction, or nullopt when base already constrains s's feature.
    static std::optional<Predicate> conjoin(const Predicate& base, SingletonPredicate s);

    const std::vector<SingletonPredicate>& atoms() const { return atoms_; }
    size_t cross_size() const { return atoms_.size(); }
    bool is_overall() const { return atoms_.empty(); }

    bool matches(std::span<const int32_t> row_values) const {
        for (const auto& a : atoms_) {
            if (row_values[a.feature] != a.value) return false;
        }
        return true;
    }

    size_t hash() const;

    friend bool operator==(const Predicate&, const Predicate&) = default;
    friend auto operator<=>(const Predicate&, const Predicate&) = default;

private:
    std::vector<SingletonPredicate> atoms_;
};

struct PredicateHash {
    size_t operator()(const Predicate& p) const { return p.hash(); }
};

using PredicateSet = std::unordered_set<Predicate, PredicateHash>;

// True iff parent's singletons are a subset of child's, i.e. the child's
// row set is contained in the parent's.
bool is_subslice(const Predicate& child, const Predicate& parent);

// Membership structure over pruned predicates (significant + too-small).
// Answers "is p a superset of any member" so the search can skip candidates
// whose slices are contained in an already-settled slice. Members are
// bucketed by their first singleton; a member must share its first singleton
// with any superset, so only those buckets are scanned.
class PruneIndex {
public:
    void insert(const Predicate& p);
    bool prunes(const Predicate& p) const;
    size_t size() const { return size_; }

private:
    static uint64_t atom_key(const SingletonPredicate& a) {
        return (static_cast<uint64_t>(a.feature) << 32) |
               static_cast<uint32_t>(a.value);
    }
    bool contains_empty_ = false;
    std::unordered_map<uint64_t, std::vector<Predicate>> by_first_;
    size_t size_ = 0;
};

// All canonical predicates with exactly `cross_size` singletons.
void for_each_in_layer(const FeatureSchema& schema, size_t cross_size,
                       const std::function<void(const Predicate&)>& fn);
std::vector<Predicate> enumerate_layer(const FeatureSchema& schema, size_t cross_size);

// counts[l] = number of layer-l candidates (sum over l-subsets of features of
// the product of their domain sizes); counts[0] = 1.
std::vector<double> layer_candidate_counts(const FeatureSchema& schema, size_t max_cross);
double batch_space_size(const FeatureSchema& schema, size_t max_cross);

struct ExpandStats {
    uint64_t pruned = 0;      // rejected: superset of a pruned predicate
    uint64_t duplicates = 0;  // rejected: already generated this run
};

// One-singleton subdivisions of base that are conflict-free, unpruned, within
// the cross-size cap and new to this run. Accepted predicates enter `dedupe`.
std::vector<Predicate> expand(const Predicate& base, const FeatureSchema& schema,
                              const PruneIndex& prune, size_t max_cross,
                              PredicateSet& dedupe, ExpandStats* stats = nullptr);

// "feature=value" / "feature∈[lo,hi)" joined by " AND "; the empty predicate
// renders as "OVERALL". parse_predicate inverts render_predicate exactly.
std::string render_predicate(const Predicate& p, const FeatureSchema& schema);
Predicate parse_predicate(const std::string& text, const FeatureSchema& schema);

}  // namespace slicescope
