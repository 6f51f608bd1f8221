#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

// Finite operation tables: a total k-ary operation on the base set
// {0,...,q-1}, stored as a flat value table of length q^k.
//
// Tuple encoding (fixed project-wide): row-major with x1 most significant,
//   index(x1,...,xk) = ((x1*q + x2)*q + ...)*q + xk.
// Arity 0 is excluded; constants are constant unary tables.

namespace cloneforge {

std::size_t pow_checked(std::uint32_t q, std::uint32_t k); // q^k, throws on overflow

std::size_t index_of_tuple(std::span<const std::uint8_t> xs, std::uint32_t q);
void tuple_of_index(std::size_t idx, std::uint32_t q, std::span<std::uint8_t> out);

class op_table {
public:
    op_table(std::uint32_t base, std::uint32_t arity, std::vector<std::uint8_t> table);

    static op_table projection(std::uint32_t q, std::uint32_t n, std::uint32_t i); // i in [1,n]
    static op_table identity(std::uint32_t q);
    static op_table constant(std::uint32_t q, std::uint8_t value); // unary

    std::uint32_t base() const { return base_; }
    std::uint32_t arity() const { return arity_; }
    const std::vector<std::uint8_t>& table() const { return table_; }
    std::size_t size() const { return table_.size(); }

    std::uint8_t at(std::size_t flat_index) const { return table_[flat_index]; }
    std::uint8_t operator()(std::span<const std::uint8_t> args) const;

    bool operator==(const op_table&) const = default;
    bool operator<(const op_table& o) const; // (arity, table) lexicographic, same base

    // canonical byte key: arity byte followed by the table
    std::string key() const;

    // q = 2 only: table packed into bits, bit j = entry j
    std::uint64_t packed2() const;
    static op_table from_packed2(std::uint32_t arity, std::uint64_t mask);

private:
    std::uint32_t base_;
    std::uint32_t arity_;
    std::vector<std::uint8_t> table_;
};

// h(x) = f(g1(x),...,gk(x)); all gs of equal arity and base, |gs| = arity(f)
op_table compose(const op_table& f, std::span<const op_table> gs);

// f^D(x) = f(x,...,x)
op_table diagonal(const op_table& f);

// {x : f(x,...,x) = x} and its complement, both sorted
std::vector<std::uint8_t> fix_set(const op_table& f);
std::vector<std::uint8_t> nix_set(const op_table& f);
bool is_idempotent(const op_table& f);

nlohmann::json op_table_to_json(const op_table& f);
op_table op_table_from_json(const nlohmann::json& j);

} // namespace cloneforge
