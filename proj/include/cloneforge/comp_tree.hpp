#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "cloneforge/op_table.hpp"

// Composition trees: membership certificates for generated clones. A tree
// denotes an operation over an indexed generator list; evaluating it bottom-up
// yields the table it certifies.

namespace cloneforge {

struct comp_tree {
    enum class kind : std::uint8_t { proj, gen, apply };

    kind node = kind::proj;
    std::uint32_t proj_arity = 1; // proj: n
    std::uint32_t proj_index = 1; // proj: i, 1-based
    std::uint32_t gen_index = 0;  // gen
    // apply: op holds exactly one subtree (the operation being applied),
    // args its children, all of equal arity
    std::vector<comp_tree> op;
    std::vector<comp_tree> args;

    static comp_tree proj(std::uint32_t n, std::uint32_t i);
    static comp_tree gen(std::uint32_t index);
    static comp_tree apply(comp_tree f, std::vector<comp_tree> args);

    std::size_t node_count() const;
};

// Evaluates the tree over the generator list; q is the shared base size.
// Throws on malformed trees (bad indices, ragged argument arities).
op_table evaluate_tree(const comp_tree& t, std::span<const op_table> generators,
                       std::uint32_t q);

nlohmann::json comp_tree_to_json(const comp_tree& t);
comp_tree comp_tree_from_json(const nlohmann::json& j);

} // namespace cloneforge
