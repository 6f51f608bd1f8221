#include "cloneforge/clone_engine.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "cloneforge/kernels.hpp"
#include "cloneforge/rng.hpp"

namespace cloneforge {

namespace {

// q^(q^n) when it fits in 64 bits
std::optional<std::uint64_t> full_table_count(std::uint32_t q, std::uint32_t n) {
    if (q == 1)
        return 1;
    std::uint64_t e;
    try {
        e = pow_checked(q, n);
    } catch (const std::overflow_error&) {
        return std::nullopt;
    }
    std::uint64_t r = 1;
    for (std::uint64_t i = 0; i < e; ++i) {
        if (r > std::numeric_limits<std::uint64_t>::max() / q)
            return std::nullopt;
        r *= q;
    }
    return r;
}

constexpr std::uint64_t kBitmapBitLimit = 1ULL << 24; // beyond this, hash-set dedup

class closure_builder {
public:
    closure_builder(std::uint32_t base, std::span<const op_table> gens, closure_limits lim)
        : q_(base), lim_(lim) {
        if (q_ < 1)
            throw std::invalid_argument("generate_clone: base must be >= 1");
        if (lim_.arity_bound < 1 || lim_.size_bound < 1)
            throw std::invalid_argument("generate_clone: bounds must be positive");
        for (const op_table& g : gens) {
            if (g.base() != q_)
                throw std::invalid_argument("generate_clone: generator base mismatch");
            if (g.arity() > lim_.arity_bound)
                throw std::invalid_argument("generate_clone: generator arity above arity_bound");
        }
        packed_ = (q_ == 2 && lim_.arity_bound <= 6);
        gens_ = gens;
    }

    closure_result run() {
        const std::uint32_t bound = lim_.arity_bound;
        res_.base = q_;
        res_.limits = lim_;
        res_.by_arity.assign(bound + 1, {});
        res_.note = "bounded closure: lower approximation of the generated clone "
                    "restricted to arity <= arity_bound; compositions through higher "
                    "arities are excluded";
        full_count_.assign(bound + 1, std::nullopt);
        for (std::uint32_t n = 1; n <= bound; ++n)
            full_count_[n] = full_table_count(q_, n);
        if (packed_) {
            masks_.assign(bound + 1, {});
            bitmap_.assign(bound + 1, {});
            mask_seen_.assign(bound + 1, {});
            for (std::uint32_t n = 1; n <= bound; ++n) {
                const std::uint64_t bits = *full_count_[n]; // 2^(2^n), n <= 6
                if (bits <= kBitmapBitLimit)
                    bitmap_[n].assign((bits + 63) / 64, 0);
            }
        }

        // round 0: projections, then generators
        for (std::uint32_t n = 1; n <= bound && !stop_; ++n)
            for (std::uint32_t i = 1; i <= n && !stop_; ++i) {
                closure_entry e{op_table::projection(q_, n, i), closure_entry::origin::projection};
                e.proj_arity = n;
                e.proj_index = i;
                try_add(std::move(e));
            }
        for (std::size_t gi = 0; gi < gens_.size() && !stop_; ++gi) {
            closure_entry e{gens_[gi], closure_entry::origin::generator};
            e.gen_index = static_cast<std::uint32_t>(gi);
            try_add(std::move(e));
        }

        old_end_.assign(bound + 1, 0);
        known_end_.assign(bound + 1, 0);
        for (std::uint32_t n = 1; n <= bound; ++n)
            known_end_[n] = res_.by_arity[n].size();
        f_known_ = res_.ops.size();

        bool any_new = f_known_ > 0;
        for (std::uint32_t round = 1; any_new && !stop_; ++round) {
            compose_round(round);
            any_new = res_.ops.size() > f_known_;
            for (std::uint32_t n = 1; n <= bound; ++n) {
                old_end_[n] = known_end_[n];
                known_end_[n] = res_.by_arity[n].size();
            }
            f_known_ = res_.ops.size();
        }
        res_.complete = !stop_;
        return std::move(res_);
    }

private:
    bool layer_full(std::uint32_t n) const {
        return full_count_[n] && res_.by_arity[n].size() == *full_count_[n];
    }

    bool seen_mask(std::uint32_t n, std::uint64_t m) const {
        if (!bitmap_[n].empty())
            return bitmap_[n][m >> 6] >> (m & 63) & 1;
        return mask_seen_[n].contains(m);
    }

    void mark_mask(std::uint32_t n, std::uint64_t m) {
        if (!bitmap_[n].empty())
            bitmap_[n][m >> 6] |= 1ULL << (m & 63);
        else
            mask_seen_[n].insert(m);
    }

    // Deduplicated insert; returns false for duplicates or once stopped.
    bool try_add(closure_entry&& e) {
        if (stop_)
            return false;
        auto [it, inserted] = res_.index.emplace(e.op.key(),
                                                 static_cast<std::uint32_t>(res_.ops.size()));
        if (!inserted)
            return false;
        if (res_.ops.size() >= lim_.size_bound) {
            res_.index.erase(it);
            res_.size_bound_hit = true;
            stop_ = true;
            return false;
        }
        const std::uint32_t n = e.op.arity();
        if (packed_) {
            const std::uint64_t m = e.op.packed2();
            mark_mask(n, m);
            masks_[n].push_back(m);
            entry_mask_.push_back(m);
        }
        res_.by_arity[n].push_back(static_cast<std::uint32_t>(res_.ops.size()));
        res_.ops.push_back(std::move(e));
        return true;
    }

    void compose_round(std::uint32_t round) {
        const std::uint32_t bound = lim_.arity_bound;
        for (std::uint32_t fi = 0; fi < f_known_ && !stop_; ++fi) {
            const std::uint32_t k = res_.ops[fi].op.arity();
            const bool f_new = res_.ops[fi].round == round - 1;
            // widened lookup table of f for the generic path
            if (!packed_) {
                flut_.resize(res_.ops[fi].op.size());
                kernels::widen_lut(res_.ops[fi].op.table().data(), flut_.size(), flut_.data());
            }
            for (std::uint32_t n = 1; n <= bound && !stop_; ++n) {
                if (layer_full(n))
                    continue;
                const std::size_t m = known_end_[n];
                if (m == 0)
                    continue;
                std::array<std::pair<std::size_t, std::size_t>, 64> ranges;
                if (f_new) {
                    for (std::uint32_t v = 0; v < k; ++v)
                        ranges[v] = {0, m};
                    sweep(fi, k, n, ranges, round);
                } else {
                    const std::size_t old_m = old_end_[n];
                    if (old_m == m)
                        continue; // no new ops of this arity last round
                    for (std::uint32_t j = 0; j < k && !stop_; ++j) {
                        for (std::uint32_t v = 0; v < j; ++v)
                            ranges[v] = {0, old_m};
                        ranges[j] = {old_m, m};
                        for (std::uint32_t v = j + 1; v < k; ++v)
                            ranges[v] = {0, m};
                        sweep(fi, k, n, ranges, round);
                    }
                }
            }
        }
    }

    // Odometer over argument slots 0..k-2, batched sweep over the last slot.
    void sweep(std::uint32_t fi, std::uint32_t k, std::uint32_t n,
               const std::array<std::pair<std::size_t, std::size_t>, 64>& ranges,
               std::uint32_t round) {
        for (std::uint32_t v = 0; v < k; ++v)
            if (ranges[v].first >= ranges[v].second)
                return;
        std::array<std::size_t, 64> slot;
        for (std::uint32_t v = 0; v + 1 < k; ++v)
            slot[v] = ranges[v].first;
        const std::size_t last_lo = ranges[k - 1].first;
        const std::size_t last_hi = ranges[k - 1].second;

        for (;;) {
            if (packed_)
                sweep_last_packed(fi, k, n, slot, last_lo, last_hi, round);
            else
                sweep_last_generic(fi, k, n, slot, last_lo, last_hi, round);
            if (stop_)
                return;
            // advance odometer over the first k-1 slots
            std::uint32_t v = k - 1;
            while (v > 0) {
                --v;
                if (++slot[v] < ranges[v].second)
                    break;
                slot[v] = ranges[v].first;
                if (v == 0)
                    return;
            }
            if (k == 1)
                return;
        }
    }

    void sweep_last_packed(std::uint32_t fi, std::uint32_t k, std::uint32_t n,
                           const std::array<std::size_t, 64>& slot, std::size_t lo,
                           std::size_t hi, std::uint32_t round) {
        std::uint64_t prefix[64];
        for (std::uint32_t v = 0; v + 1 < k; ++v)
            prefix[v] = masks_[n][slot[v]];
        const std::size_t count = hi - lo;
        out_masks_.resize(count);
        kernels::compose_packed2_batch(entry_mask_[fi], static_cast<int>(k), prefix,
                                       masks_[n].data() + lo, out_masks_.data(), count,
                                       1u << n);
        for (std::size_t i = 0; i < count && !stop_; ++i) {
            const std::uint64_t msk = out_masks_[i];
            if (seen_mask(n, msk))
                continue;
            closure_entry e{op_table::from_packed2(n, msk), closure_entry::origin::composed};
            e.f_index = fi;
            e.round = round;
            e.arg_indices.reserve(k);
            for (std::uint32_t v = 0; v + 1 < k; ++v)
                e.arg_indices.push_back(res_.by_arity[n][slot[v]]);
            e.arg_indices.push_back(res_.by_arity[n][lo + i]);
            try_add(std::move(e));
        }
    }

    void sweep_last_generic(std::uint32_t fi, std::uint32_t k, std::uint32_t n,
                            const std::array<std::size_t, 64>& slot, std::size_t lo,
                            std::size_t hi, std::uint32_t round) {
        const std::size_t npts = pow_checked(q_, n);
        idx_prefix_.assign(npts, 0);
        if (k > 1) {
            const std::uint8_t* vals[64];
            for (std::uint32_t v = 0; v + 1 < k; ++v)
                vals[v] = res_.ops[res_.by_arity[n][slot[v]]].op.table().data();
            kernels::mix_radix_u32(idx_prefix_.data(), vals, static_cast<int>(k) - 1, npts, q_);
        }
        out_table_.resize(npts);
        for (std::size_t t = lo; t < hi && !stop_; ++t) {
            const std::uint8_t* g = res_.ops[res_.by_arity[n][t]].op.table().data();
            for (std::size_t p = 0; p < npts; ++p)
                out_table_[p] = static_cast<std::uint8_t>(flut_[idx_prefix_[p] * q_ + g[p]]);
            closure_entry e{op_table(q_, n, out_table_), closure_entry::origin::composed};
            e.f_index = fi;
            e.round = round;
            e.arg_indices.reserve(k);
            for (std::uint32_t v = 0; v + 1 < k; ++v)
                e.arg_indices.push_back(res_.by_arity[n][slot[v]]);
            e.arg_indices.push_back(res_.by_arity[n][t]);
            try_add(std::move(e));
        }
    }

    std::uint32_t q_;
    closure_limits lim_;
    std::span<const op_table> gens_;
    closure_result res_;
    bool packed_ = false;
    bool stop_ = false;

    std::vector<std::vector<std::uint64_t>> masks_;  // per arity, parallel to by_arity
    std::vector<std::uint64_t> entry_mask_;          // per op entry
    std::vector<std::vector<std::uint64_t>> bitmap_; // per arity dedup
    std::vector<std::unordered_set<std::uint64_t>> mask_seen_;
    std::vector<std::optional<std::uint64_t>> full_count_;
    std::vector<std::size_t> old_end_, known_end_;
    std::size_t f_known_ = 0;

    // scratch
    std::vector<std::uint64_t> out_masks_;
    std::vector<std::uint32_t> flut_, idx_prefix_;
    std::vector<std::uint8_t> out_table_;
};

} // namespace

std::optional<std::uint32_t> closure_result::find(const op_table& f) const {
    auto it = index.find(f.key());
    if (it == index.end())
        return std::nullopt;
    return it->second;
}

bool closure_result::layer_full(std::uint32_t arity) const {
    auto cnt = full_table_count(base, arity);
    return cnt && arity <= limits.arity_bound && by_arity[arity].size() == *cnt;
}

bool closure_result::saturated(std::uint32_t arity) const {
    if (arity > limits.arity_bound)
        return false;
    return complete || layer_full(arity);
}

comp_tree closure_result::provenance_tree(std::uint32_t i) const {
    const closure_entry& e = ops.at(i);
    switch (e.from) {
    case closure_entry::origin::projection:
        return comp_tree::proj(e.proj_arity, e.proj_index);
    case closure_entry::origin::generator:
        return comp_tree::gen(e.gen_index);
    case closure_entry::origin::composed: {
        std::vector<comp_tree> args;
        args.reserve(e.arg_indices.size());
        for (std::uint32_t a : e.arg_indices)
            args.push_back(provenance_tree(a));
        return comp_tree::apply(provenance_tree(e.f_index), std::move(args));
    }
    }
    throw std::logic_error("provenance_tree: bad origin");
}

closure_result generate_clone(std::span<const op_table> gens, closure_limits lim) {
    if (gens.empty())
        throw std::invalid_argument("generate_clone: pass the base size for empty generator sets");
    return closure_builder(gens[0].base(), gens, lim).run();
}

closure_result generate_clone(std::uint32_t base, std::span<const op_table> gens,
                              closure_limits lim) {
    return closure_builder(base, gens, lim).run();
}

bool pol_member(std::span<const std::uint8_t> subset, const op_table& f) {
    std::vector<bool> in(f.base(), false);
    for (std::uint8_t a : subset) {
        if (a >= f.base())
            throw std::invalid_argument("pol_member: subset element out of range");
        in[a] = true;
    }
    if (subset.empty())
        return true;
    const std::uint32_t k = f.arity();
    std::vector<std::size_t> pos(k, 0); // odometer over subset elements
    std::vector<std::uint8_t> args(k);
    for (;;) {
        for (std::uint32_t v = 0; v < k; ++v)
            args[v] = subset[pos[v]];
        if (!in[f(args)])
            return false;
        std::uint32_t v = k;
        while (v > 0) {
            --v;
            if (++pos[v] < subset.size())
                break;
            pos[v] = 0;
            if (v == 0)
                return true;
        }
    }
}

void partial_fn::validate() const {
    std::set<std::vector<std::uint8_t>> seen;
    for (const auto& [xs, v] : entries) {
        if (xs.size() != arity)
            throw std::invalid_argument("partial_fn: ragged tuple arity");
        for (std::uint8_t x : xs)
            if (x >= base)
                throw std::invalid_argument("partial_fn: tuple coordinate out of range");
        if (v >= base)
            throw std::invalid_argument("partial_fn: value out of range");
        if (!seen.insert(xs).second)
            throw std::invalid_argument("partial_fn: duplicate tuple");
    }
}

bool partial_fn::agrees(const op_table& f) const {
    if (f.base() != base || f.arity() != arity)
        return false;
    for (const auto& [xs, v] : entries)
        if (f(xs) != v)
            return false;
    return true;
}

extend_result clone_predicate::window_extendable(const partial_fn& w,
                                                 std::uint64_t table_budget) const {
    w.validate();
    auto cnt = full_table_count(base(), w.arity);
    if (!cnt || *cnt > table_budget)
        return {tristate::undecided, std::nullopt};
    const std::size_t sz = pow_checked(base(), w.arity);
    std::vector<std::uint8_t> t(sz, 0);
    for (;;) {
        op_table cand(base(), w.arity, t);
        if (w.agrees(cand) && member(cand))
            return {tristate::yes, std::move(cand)};
        std::size_t p = sz;
        bool done = true;
        while (p > 0) {
            --p;
            if (++t[p] < base()) {
                done = false;
                break;
            }
            t[p] = 0;
        }
        if (done)
            return {tristate::no, std::nullopt};
    }
}

pol_subset_predicate::pol_subset_predicate(std::uint32_t q, std::vector<std::uint8_t> subset)
    : q_(q), subset_(std::move(subset)) {
    std::sort(subset_.begin(), subset_.end());
    subset_.erase(std::unique(subset_.begin(), subset_.end()), subset_.end());
    for (std::uint8_t a : subset_)
        if (a >= q_)
            throw std::invalid_argument("pol_subset: element out of range");
}

std::string pol_subset_predicate::name() const {
    std::string s = "Pol{";
    for (std::size_t i = 0; i < subset_.size(); ++i)
        s += (i ? "," : "") + std::to_string(subset_[i]);
    return s + "}";
}

bool pol_subset_predicate::member(const op_table& f) const {
    if (f.base() != q_)
        throw std::invalid_argument("pol_subset: base mismatch");
    return pol_member(subset_, f);
}

extend_result pol_subset_predicate::window_extendable(const partial_fn& w, std::uint64_t) const {
    w.validate();
    if (w.base != q_)
        throw std::invalid_argument("pol_subset: base mismatch");
    std::vector<bool> in(q_, false);
    for (std::uint8_t a : subset_)
        in[a] = true;
    for (const auto& [xs, v] : w.entries) {
        bool all_in = true;
        for (std::uint8_t x : xs)
            all_in = all_in && in[x];
        if (all_in && !in[v])
            return {tristate::no, std::nullopt};
    }
    // off-window completion by the first projection preserves every subset
    op_table wit = op_table::projection(q_, w.arity, 1);
    std::vector<std::uint8_t> t = wit.table();
    for (const auto& [xs, v] : w.entries)
        t[index_of_tuple(xs, q_)] = v;
    return {tristate::yes, op_table(q_, w.arity, std::move(t))};
}

clone_spec clone_spec::generated(std::uint32_t base, std::vector<op_table> gens,
                                 closure_limits lim) {
    for (const op_table& g : gens)
        if (g.base() != base)
            throw std::invalid_argument("clone_spec: generator base mismatch");
    clone_spec c;
    c.gens_ = std::move(gens);
    c.limits_ = lim;
    c.base_ = base;
    return c;
}

clone_spec clone_spec::predicate(std::shared_ptr<const clone_predicate> pred) {
    clone_spec c;
    c.pred_ = std::move(pred);
    c.base_ = c.pred_->base();
    return c;
}

std::uint32_t clone_spec::base() const { return base_; }

const closure_result& clone_spec::closure() const {
    if (pred_)
        throw std::logic_error("clone_spec: predicate clones have no closure");
    if (!closure_cache_)
        closure_cache_ = std::make_shared<const closure_result>(
            generate_clone(base_, gens_, limits_));
    return *closure_cache_;
}

containment contains(const clone_spec& c, const op_table& f) {
    if (f.base() != c.base())
        throw std::invalid_argument("contains: base mismatch");
    if (!c.is_generated()) {
        const bool m = c.pred().member(f);
        return {m ? tristate::yes : tristate::no,
                m ? "predicate satisfied" : "predicate violated", std::nullopt, std::nullopt};
    }
    if (f.arity() > c.limits().arity_bound)
        return {tristate::undecided, "arity above the closure bound", std::nullopt, std::nullopt};
    const closure_result& cr = c.closure();
    if (auto idx = cr.find(f))
        return {tristate::yes, "member of the bounded closure", cr.provenance_tree(*idx), f};
    if (cr.size_bound_hit)
        return {tristate::undecided, "closure enumeration aborted at size_bound", std::nullopt,
                std::nullopt};
    return {tristate::no, "not in the bounded closure", std::nullopt, std::nullopt};
}

containment interpolates(const clone_spec& c, const partial_fn& window,
                         std::uint64_t table_budget) {
    window.validate();
    if (window.base != c.base())
        throw std::invalid_argument("interpolates: base mismatch");
    if (window.entries.empty()) {
        op_table wit = op_table::projection(window.base, window.arity, 1);
        return {tristate::yes, "empty window: vacuous",
                comp_tree::proj(window.arity, 1), std::move(wit)};
    }
    if (!c.is_generated()) {
        extend_result er = c.pred().window_extendable(window, table_budget);
        containment r;
        r.value = er.value;
        r.reason = er.value == tristate::yes        ? "predicate member interpolates the window"
                   : er.value == tristate::no       ? "no predicate member fits the window"
                                                    : "window search exceeded the table budget";
        r.witness = std::move(er.witness);
        return r;
    }
    if (window.arity > c.limits().arity_bound)
        return {tristate::undecided, "window arity above the closure bound", std::nullopt,
                std::nullopt};
    const closure_result& cr = c.closure();
    for (std::uint32_t idx : cr.by_arity[window.arity])
        if (window.agrees(cr.ops[idx].op))
            return {tristate::yes, "closure member interpolates the window",
                    cr.provenance_tree(idx), cr.ops[idx].op};
    if (!cr.saturated(window.arity))
        return {tristate::undecided, "no witness found and closure not saturated", std::nullopt,
                std::nullopt};
    return {tristate::no, "no member of the bounded closure fits the window", std::nullopt,
            std::nullopt};
}

namespace {

bool check_member_of(const clone_spec& c2, const op_table& f, leq_result& r) {
    containment ct = contains(c2, f);
    if (ct.value == tristate::yes)
        return true;
    r.holds = false;
    r.counterexample = f;
    r.note = ct.value == tristate::no ? "counterexample found"
                                      : "membership in c2 undecided at its bounds";
    return false;
}

} // namespace

leq_result clone_leq_upto(const clone_spec& c1, const clone_spec& c2, std::uint32_t max_arity,
                          const leq_options& opt) {
    if (c1.base() != c2.base())
        throw std::invalid_argument("clone_leq_upto: base mismatch");
    const std::uint32_t q = c1.base();
    leq_result r;
    r.holds = true;

    if (c1.is_generated()) {
        const closure_result& cr = c1.closure();
        const std::uint32_t top = std::min(max_arity, c1.limits().arity_bound);
        for (std::uint32_t k = 1; k <= top && r.holds; ++k)
            for (std::uint32_t idx : cr.by_arity[k]) {
                ++r.checked;
                if (!check_member_of(c2, cr.ops[idx].op, r))
                    break;
            }
        r.exhaustive = cr.complete && max_arity <= c1.limits().arity_bound;
        if (max_arity > c1.limits().arity_bound && r.note.empty())
            r.note = "c1 members enumerated only up to its arity bound";
        return r;
    }

    if (opt.mode == leq_mode::exhaustive) {
        for (std::uint32_t k = 1; k <= max_arity; ++k) {
            auto cnt = full_table_count(q, k);
            if (!cnt || *cnt > opt.table_budget)
                throw std::runtime_error(
                    "clone_leq_upto: exhaustive enumeration infeasible at arity " +
                    std::to_string(k) + "; use sampled mode");
        }
        for (std::uint32_t k = 1; k <= max_arity && r.holds; ++k) {
            const std::size_t sz = pow_checked(q, k);
            std::vector<std::uint8_t> t(sz, 0);
            for (;;) {
                op_table cand(q, k, t);
                if (c1.pred().member(cand)) {
                    ++r.checked;
                    if (!check_member_of(c2, cand, r))
                        break;
                }
                std::size_t p = sz;
                bool done = true;
                while (p > 0) {
                    --p;
                    if (++t[p] < q) {
                        done = false;
                        break;
                    }
                    t[p] = 0;
                }
                if (done)
                    break;
            }
        }
        r.exhaustive = true;
        return r;
    }

    rng gen(opt.seed);
    for (std::uint64_t s = 0; s < opt.samples && r.holds; ++s) {
        const std::uint32_t k = 1 + static_cast<std::uint32_t>(gen.below(max_arity));
        const std::size_t sz = pow_checked(q, k);
        std::vector<std::uint8_t> t(sz);
        for (auto& v : t)
            v = static_cast<std::uint8_t>(gen.below(q));
        op_table cand(q, k, std::move(t));
        if (!c1.pred().member(cand))
            continue;
        ++r.checked;
        check_member_of(c2, cand, r);
    }
    r.exhaustive = false;
    if (r.note.empty())
        r.note = "sampled check only";
    return r;
}

} // namespace cloneforge
