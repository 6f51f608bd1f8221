#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cloneforge/comp_tree.hpp"
#include "cloneforge/op_table.hpp"

// Clone generation by exhaustive closure under an arity cap, membership and
// interpolation queries, and intensional clone predicates.
//
// Bounded-search semantics: a generated closure is the set of operations of
// arity <= arity_bound reachable from the generators and projections by
// compositions whose every intermediate arity stays <= arity_bound. That is a
// lower approximation of the full clone, so queries answer with a tri-state:
// "no" always means "not in the bounded closure", never a refutation of full
// clone membership.

namespace cloneforge {

enum class tristate : std::uint8_t { no, yes, undecided };

struct closure_limits {
    std::uint32_t arity_bound = 3;
    std::uint64_t size_bound = 2'000'000;
};

struct closure_entry {
    enum class origin : std::uint8_t { projection, generator, composed };

    op_table op;
    origin from;
    std::uint32_t proj_arity = 0, proj_index = 0; // projection
    std::uint32_t gen_index = 0;                  // generator
    std::uint32_t f_index = 0;                    // composed: outer operation
    std::vector<std::uint32_t> arg_indices;       // composed: inner operations
    std::uint32_t round = 0;                      // BFS round of first discovery
};

struct closure_result {
    std::uint32_t base = 0;
    closure_limits limits;
    std::vector<closure_entry> ops;                    // discovery order
    std::vector<std::vector<std::uint32_t>> by_arity;  // arity -> indices into ops
    bool complete = false;                             // ran to fixpoint
    bool size_bound_hit = false;
    std::string note;

    std::optional<std::uint32_t> find(const op_table& f) const;
    // A layer is saturated when no further composition can enlarge it: either
    // the BFS ran to fixpoint or the layer already holds every table.
    bool saturated(std::uint32_t arity) const;
    bool layer_full(std::uint32_t arity) const;
    comp_tree provenance_tree(std::uint32_t index) const;

    std::unordered_map<std::string, std::uint32_t> index; // op key -> ops position
};

closure_result generate_clone(std::span<const op_table> gens, closure_limits lim);
// Explicit base size; required when gens is empty (projections only).
closure_result generate_clone(std::uint32_t base, std::span<const op_table> gens,
                              closure_limits lim);

// f[A^n] subseteq A
bool pol_member(std::span<const std::uint8_t> subset, const op_table& f);

// A k-ary partial operation given by finitely many (tuple -> value) pairs.
struct partial_fn {
    std::uint32_t base = 2;
    std::uint32_t arity = 1;
    std::vector<std::pair<std::vector<std::uint8_t>, std::uint8_t>> entries;

    void validate() const; // distinct tuples, uniform arity, range checks
    bool agrees(const op_table& f) const;
};

struct extend_result {
    tristate value = tristate::undecided;
    std::optional<op_table> witness;
};

// Intensional clone: a total membership test on operation tables. Predicates
// may override window_extendable with an exact construction; the default
// falls back to enumerating all tables of the window's arity, guarded by a
// table budget.
class clone_predicate {
public:
    virtual ~clone_predicate() = default;
    virtual std::uint32_t base() const = 0;
    virtual std::string name() const = 0;
    virtual bool member(const op_table& f) const = 0;
    virtual extend_result window_extendable(const partial_fn& w, std::uint64_t table_budget) const;
};

// Pol(A): operations preserving a subset of the base.
class pol_subset_predicate final : public clone_predicate {
public:
    pol_subset_predicate(std::uint32_t q, std::vector<std::uint8_t> subset);
    std::uint32_t base() const override { return q_; }
    std::string name() const override;
    bool member(const op_table& f) const override;
    extend_result window_extendable(const partial_fn& w, std::uint64_t) const override;
    const std::vector<std::uint8_t>& subset() const { return subset_; }

private:
    std::uint32_t q_;
    std::vector<std::uint8_t> subset_; // sorted, deduplicated
};

// A clone given either by generators + bounds or by a membership predicate.
class clone_spec {
public:
    static clone_spec generated(std::uint32_t base, std::vector<op_table> gens,
                                closure_limits lim);
    static clone_spec predicate(std::shared_ptr<const clone_predicate> pred);

    bool is_generated() const { return pred_ == nullptr; }
    std::uint32_t base() const;
    const std::vector<op_table>& generators() const { return gens_; }
    const closure_limits& limits() const { return limits_; }
    const clone_predicate& pred() const { return *pred_; }
    const closure_result& closure() const; // generated only; computed once

private:
    std::uint32_t base_ = 0;
    std::vector<op_table> gens_;
    closure_limits limits_;
    std::shared_ptr<const clone_predicate> pred_;
    mutable std::shared_ptr<const closure_result> closure_cache_;
};

struct containment {
    tristate value = tristate::undecided;
    std::string reason;
    std::optional<comp_tree> certificate; // generated-kind yes answers
    std::optional<op_table> witness;      // interpolation witness operation
};

containment contains(const clone_spec& c, const op_table& f);

// Is there a member of c agreeing with the window on every listed tuple?
containment interpolates(const clone_spec& c, const partial_fn& window,
                         std::uint64_t table_budget = 2'000'000);

enum class leq_mode : std::uint8_t { exhaustive, sampled };

struct leq_options {
    leq_mode mode = leq_mode::exhaustive;
    std::uint64_t samples = 1000; // sampled mode
    std::uint64_t seed = 0;
    std::uint64_t table_budget = 2'000'000; // exhaustive-mode guard
};

struct leq_result {
    bool holds = false;
    bool exhaustive = false;
    std::uint64_t checked = 0;
    std::optional<op_table> counterexample;
    std::string note;
};

// Every arity-<=k member of c1 also a member of c2? Throws when exhaustive
// enumeration would exceed the table budget.
leq_result clone_leq_upto(const clone_spec& c1, const clone_spec& c2, std::uint32_t max_arity,
                          const leq_options& opt = {});

} // namespace cloneforge
