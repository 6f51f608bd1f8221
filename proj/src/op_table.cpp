#include "cloneforge/op_table.hpp"

#include <limits>
#include <stdexcept>

#include "cloneforge/kernels.hpp"

namespace cloneforge {

std::size_t pow_checked(std::uint32_t q, std::uint32_t k) {
    std::size_t r = 1;
    for (std::uint32_t i = 0; i < k; ++i) {
        if (r > std::numeric_limits<std::size_t>::max() / q)
            throw std::overflow_error("pow_checked: q^k overflows");
        r *= q;
    }
    return r;
}

std::size_t index_of_tuple(std::span<const std::uint8_t> xs, std::uint32_t q) {
    std::size_t idx = 0;
    for (std::uint8_t x : xs)
        idx = idx * q + x;
    return idx;
}

void tuple_of_index(std::size_t idx, std::uint32_t q, std::span<std::uint8_t> out) {
    for (std::size_t i = out.size(); i-- > 0;) {
        out[i] = static_cast<std::uint8_t>(idx % q);
        idx /= q;
    }
}

op_table::op_table(std::uint32_t base, std::uint32_t arity, std::vector<std::uint8_t> table)
    : base_(base), arity_(arity), table_(std::move(table)) {
    if (base_ < 1 || base_ > 255)
        throw std::invalid_argument("op_table: base size must be in [1,255]");
    if (arity_ < 1)
        throw std::invalid_argument("op_table: arity must be >= 1");
    if (table_.size() != pow_checked(base_, arity_))
        throw std::invalid_argument("op_table: table length must be base^arity");
    for (std::uint8_t v : table_)
        if (v >= base_)
            throw std::invalid_argument("op_table: entry out of range");
}

op_table op_table::projection(std::uint32_t q, std::uint32_t n, std::uint32_t i) {
    if (i < 1 || i > n)
        throw std::out_of_range("projection: index must satisfy 1 <= i <= n");
    const std::size_t sz = pow_checked(q, n);
    std::vector<std::uint8_t> t(sz);
    // x_i is digit i of the row-major index
    const std::size_t low = pow_checked(q, n - i);
    for (std::size_t idx = 0; idx < sz; ++idx)
        t[idx] = static_cast<std::uint8_t>((idx / low) % q);
    return op_table(q, n, std::move(t));
}

op_table op_table::identity(std::uint32_t q) { return projection(q, 1, 1); }

op_table op_table::constant(std::uint32_t q, std::uint8_t value) {
    if (value >= q)
        throw std::invalid_argument("constant: value out of range");
    return op_table(q, 1, std::vector<std::uint8_t>(q, value));
}

std::uint8_t op_table::operator()(std::span<const std::uint8_t> args) const {
    if (args.size() != arity_)
        throw std::invalid_argument("op_table: wrong number of arguments");
    return table_[index_of_tuple(args, base_)];
}

bool op_table::operator<(const op_table& o) const {
    if (arity_ != o.arity_)
        return arity_ < o.arity_;
    return table_ < o.table_;
}

std::string op_table::key() const {
    std::string k;
    k.reserve(table_.size() + 1);
    k.push_back(static_cast<char>(arity_));
    k.append(table_.begin(), table_.end());
    return k;
}

std::uint64_t op_table::packed2() const {
    if (base_ != 2 || table_.size() > 64)
        throw std::logic_error("packed2: requires base 2 and arity <= 6");
    std::uint64_t m = 0;
    for (std::size_t j = 0; j < table_.size(); ++j)
        m |= static_cast<std::uint64_t>(table_[j]) << j;
    return m;
}

op_table op_table::from_packed2(std::uint32_t arity, std::uint64_t mask) {
    const std::size_t sz = pow_checked(2, arity);
    std::vector<std::uint8_t> t(sz);
    for (std::size_t j = 0; j < sz; ++j)
        t[j] = static_cast<std::uint8_t>(mask >> j & 1);
    return op_table(2, arity, std::move(t));
}

op_table compose(const op_table& f, std::span<const op_table> gs) {
    if (gs.size() != f.arity())
        throw std::invalid_argument("compose: need arity(f) inner operations");
    if (f.arity() > 64)
        throw std::invalid_argument("compose: arity above 64 unsupported");
    const std::uint32_t q = f.base();
    const std::uint32_t n = gs[0].arity();
    const std::uint8_t* vals[64];
    for (std::size_t v = 0; v < gs.size(); ++v) {
        if (gs[v].base() != q)
            throw std::invalid_argument("compose: base size mismatch");
        if (gs[v].arity() != n)
            throw std::invalid_argument("compose: inner arities must agree");
        vals[v] = gs[v].table().data();
    }
    const std::size_t npts = gs[0].size();

    std::vector<std::uint32_t> idx(npts);
    kernels::mix_radix_u32(idx.data(), vals, static_cast<int>(f.arity()), npts, q);

    std::vector<std::uint32_t> lut_w(f.size());
    kernels::widen_lut(f.table().data(), f.size(), lut_w.data());

    std::vector<std::uint8_t> out(npts);
    kernels::gather_u8(out.data(), lut_w.data(), idx.data(), npts);
    return op_table(q, n, std::move(out));
}

op_table diagonal(const op_table& f) {
    const std::uint32_t q = f.base();
    std::vector<std::uint8_t> t(q);
    std::vector<std::uint8_t> args(f.arity());
    for (std::uint32_t x = 0; x < q; ++x) {
        std::fill(args.begin(), args.end(), static_cast<std::uint8_t>(x));
        t[x] = f(args);
    }
    return op_table(q, 1, std::move(t));
}

std::vector<std::uint8_t> fix_set(const op_table& f) {
    op_table d = diagonal(f);
    std::vector<std::uint8_t> r;
    for (std::uint32_t x = 0; x < f.base(); ++x)
        if (d.at(x) == x)
            r.push_back(static_cast<std::uint8_t>(x));
    return r;
}

std::vector<std::uint8_t> nix_set(const op_table& f) {
    op_table d = diagonal(f);
    std::vector<std::uint8_t> r;
    for (std::uint32_t x = 0; x < f.base(); ++x)
        if (d.at(x) != x)
            r.push_back(static_cast<std::uint8_t>(x));
    return r;
}

bool is_idempotent(const op_table& f) { return nix_set(f).empty(); }

nlohmann::json op_table_to_json(const op_table& f) {
    return nlohmann::json{{"base", f.base()}, {"arity", f.arity()}, {"table", f.table()}};
}

op_table op_table_from_json(const nlohmann::json& j) {
    return op_table(j.at("base").get<std::uint32_t>(), j.at("arity").get<std::uint32_t>(),
                    j.at("table").get<std::vector<std::uint8_t>>());
}

} // namespace cloneforge
