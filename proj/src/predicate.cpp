#include "slicescope/predicate.hpp"

#include <algorithm>
#include <stdexcept>

#include "slicescope/bootstrap.hpp"

namespace slicescope {

Predicate Predicate::from_atoms(std::vector<SingletonPredicate> atoms) {
    std::sort(atoms.begin(), atoms.end());
    for (size_t i = 1; i < atoms.size(); ++i) {
        if (atoms[i].feature == atoms[i - 1].feature) {
            throw std::invalid_argument("predicate constrains feature " +
                                        std::to_string(atoms[i].feature) + " twice");
        }
    }
    Predicate p;
    p.atoms_ = std::move(atoms);
    return p;
}

std::optional<Predicate> Predicate::conjoin(const Predicate& base, SingletonPredicate s) {
    for (const auto& a : base.atoms_) {
        if (a.feature == s.feature) return std::nullopt;
    }
    Predicate out;
    out.atoms_.reserve(base.atoms_.size() + 1);
    bool placed = false;
    for (const auto& a : base.atoms_) {
        if (!placed && s < a) {
            out.atoms_.push_back(s);
            placed = true;
        }
        out.atoms_.push_back(a);
    }
    if (!placed) out.atoms_.push_back(s);
    return out;
}

size_t Predicate::hash() const {
    uint64_t h = 0x84222325cbf29ce4ull;
    for (const auto& a : atoms_) {
        h = mix64(h ^ ((static_cast<uint64_t>(a.feature) << 32) |
                       static_cast<uint32_t>(a.value)));
    }
    return static_cast<size_t>(h);
}

bool is_subslice(const Predicate& child, const Predicate& parent) {
    const auto& c = child.atoms();
    const auto& p = parent.atoms();
    if (p.size() > c.size()) return false;
    size_t ci = 0;
    for (const auto& pa : p) {
        while (ci < c.size() && c[ci] < pa) ++ci;
        if (ci == c.size() || !(c[ci] == pa)) return false;
        ++ci;
    }
    return true;
}

void PruneIndex::insert(const Predicate& p) {
    if (p.is_overall()) {
        contains_empty_ = true;
    } else {
        by_first_[atom_key(p.atoms().front())].push_back(p);
    }
    ++size_;
}

bool PruneIndex::prunes(const Predicate& p) const {
    if (contains_empty_) return true;
    for (const auto& a : p.atoms()) {
        auto it = by_first_.find(atom_key(a));
        if (it == by_first_.end()) continue;
        for (const auto& member : it->second) {
            if (is_subslice(p, member)) return true;
        }
    }
    return false;
}

void for_each_in_layer(const FeatureSchema& schema, size_t cross_size,
                       const std::function<void(const Predicate&)>& fn) {
    if (cross_size == 0 || cross_size > schema.feature_count()) return;
    std::vector<SingletonPredicate> atoms(cross_size);

    // Chooses features in ascending order with one value each, so emitted
    // atom lists are canonical without re-sorting.
    auto recurse = [&](auto&& self, size_t next_feature, size_t depth) -> void {
        if (depth == cross_size) {
            Predicate p = Predicate::from_atoms(atoms);
            fn(p);
            return;
        }
        const size_t remaining = cross_size - depth;
        for (size_t f = next_feature; f + remaining <= schema.feature_count(); ++f) {
            const int32_t domain = schema.features[f].domain_size();
            for (int32_t v = 0; v < domain; ++v) {
                atoms[depth] = {static_cast<uint32_t>(f), v};
                self(self, f + 1, depth + 1);
            }
        }
    };
    recurse(recurse, 0, 0);
}

std::vector<Predicate> enumerate_layer(const FeatureSchema& schema, size_t cross_size) {
    std::vector<Predicate> out;
    for_each_in_layer(schema, cross_size, [&](const Predicate& p) { out.push_back(p); });
    return out;
}

std::vector<double> layer_candidate_counts(const FeatureSchema& schema, size_t max_cross) {
    std::vector<double> dp(max_cross + 1, 0.0);
    dp[0] = 1.0;
    for (const auto& feature : schema.features) {
        const double domain = feature.domain_size();
        for (size_t j = max_cross; j >= 1; --j) {
            dp[j] += dp[j - 1] * domain;
        }
    }
    return dp;
}

double batch_space_size(const FeatureSchema& schema, size_t max_cross) {
    auto counts = layer_candidate_counts(schema, max_cross);
    double total = 0;
    for (size_t l = 1; l < counts.size(); ++l) total += counts[l];
    return total;
}

std::vector<Predicate> expand(const Predicate& base, const FeatureSchema& schema,
                              const PruneIndex& prune, size_t max_cross,
                              PredicateSet& dedupe, ExpandStats* stats) {
    std::vector<Predicate> out;
    if (base.cross_size() + 1 > max_cross) return out;
    for (size_t f = 0; f < schema.feature_count(); ++f) {
        const int32_t domain = schema.features[f].domain_size();
        for (int32_t v = 0; v < domain; ++v) {
            auto cand = Predicate::conjoin(base, {static_cast<uint32_t>(f), v});
            if (!cand) break;  // base constrains f; every value conflicts
            if (prune.prunes(*cand)) {
                if (stats) stats->pruned++;
                continue;
            }
            if (dedupe.contains(*cand)) {
                if (stats) stats->duplicates++;
                continue;
            }
            dedupe.insert(*cand);
            out.push_back(std::move(*cand));
        }
    }
    return out;
}

// ============================================================================
// Rendering
// ============================================================================

namespace {

constexpr const char* kElem = "\xE2\x88\x88";  // "∈"
constexpr const char* kOverall = "OVERALL";
constexpr const char* kOtherLabel = "OTHER";

std::string bin_label(const FeatureEntry& feature, int32_t bin) {
    const auto& edges = feature.bin_lower_edges;
    std::string hi = (static_cast<size_t>(bin) + 1 < edges.size())
                         ? format_g9(edges[bin + 1])
                         : "inf";
    return "[" + format_g9(edges[bin]) + "," + hi + ")";
}

}  // namespace

std::string render_predicate(const Predicate& p, const FeatureSchema& schema) {
    if (p.is_overall()) return kOverall;
    std::string out;
    for (const auto& a : p.atoms()) {
        if (!out.empty()) out += " AND ";
        const auto& feature = schema.features[a.feature];
        if (feature.kind == FeatureKind::Categorical) {
            out += feature.name + "=";
            out += (feature.has_other && a.value == feature.other_id())
                       ? kOtherLabel
                       : feature.categories[a.value];
        } else {
            out += feature.name + kElem + bin_label(feature, a.value);
        }
    }
    return out;
}

namespace {

SingletonPredicate parse_atom(const std::string& token, const FeatureSchema& schema) {
    const std::string elem(kElem);
    size_t split = token.find(elem);
    bool is_bin = split != std::string::npos;
    size_t name_len = split;
    if (!is_bin) {
        split = token.find('=');
        if (split == std::string::npos) {
            throw std::invalid_argument("cannot parse predicate term: " + token);
        }
        name_len = split;
    }
    const std::string name = token.substr(0, name_len);
    const std::string value =
        token.substr(name_len + (is_bin ? elem.size() : 1));

    for (size_t f = 0; f < schema.feature_count(); ++f) {
        const auto& feature = schema.features[f];
        if (feature.name != name) continue;
        if (is_bin) {
            if (feature.kind != FeatureKind::Numeric) break;
            for (int32_t b = 0; b < feature.domain_size(); ++b) {
                if (bin_label(feature, b) == value) {
                    return {static_cast<uint32_t>(f), b};
                }
            }
        } else {
            if (feature.kind != FeatureKind::Categorical) break;
            for (size_t i = 0; i < feature.categories.size(); ++i) {
                if (feature.categories[i] == value) {
                    return {static_cast<uint32_t>(f), static_cast<int32_t>(i)};
                }
            }
            if (feature.has_other && value == kOtherLabel) {
                return {static_cast<uint32_t>(f), feature.other_id()};
            }
        }
        break;
    }
    throw std::invalid_argument("predicate term does not match the schema: " + token);
}

}  // namespace

Predicate parse_predicate(const std::string& text, const FeatureSchema& schema) {
    if (text == kOverall) return Predicate{};
    std::vector<SingletonPredicate> atoms;
    size_t start = 0;
    const std::string sep = " AND ";
    while (true) {
        size_t pos = text.find(sep, start);
        const std::string token =
            (pos == std::string::npos) ? text.substr(start) : text.substr(start, pos - start);
        atoms.push_back(parse_atom(token, schema));
        if (pos == std::string::npos) break;
        start = pos + sep.size();
    }
    return Predicate::from_atoms(std::move(atoms));
}

}  // namespace slicescope
