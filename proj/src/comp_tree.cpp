#include "cloneforge/comp_tree.hpp"

#include <stdexcept>

namespace cloneforge {

comp_tree comp_tree::proj(std::uint32_t n, std::uint32_t i) {
    comp_tree t;
    t.node = kind::proj;
    t.proj_arity = n;
    t.proj_index = i;
    return t;
}

comp_tree comp_tree::gen(std::uint32_t index) {
    comp_tree t;
    t.node = kind::gen;
    t.gen_index = index;
    return t;
}

comp_tree comp_tree::apply(comp_tree f, std::vector<comp_tree> args) {
    comp_tree t;
    t.node = kind::apply;
    t.op.push_back(std::move(f));
    t.args = std::move(args);
    return t;
}

std::size_t comp_tree::node_count() const {
    std::size_t n = 1;
    for (const comp_tree& c : op)
        n += c.node_count();
    for (const comp_tree& c : args)
        n += c.node_count();
    return n;
}

op_table evaluate_tree(const comp_tree& t, std::span<const op_table> generators,
                       std::uint32_t q) {
    switch (t.node) {
    case comp_tree::kind::proj:
        return op_table::projection(q, t.proj_arity, t.proj_index);
    case comp_tree::kind::gen:
        if (t.gen_index >= generators.size())
            throw std::out_of_range("evaluate_tree: generator index out of range");
        return generators[t.gen_index];
    case comp_tree::kind::apply: {
        if (t.op.size() != 1)
            throw std::invalid_argument("evaluate_tree: apply node needs exactly one operation");
        op_table f = evaluate_tree(t.op.front(), generators, q);
        if (t.args.size() != f.arity())
            throw std::invalid_argument("evaluate_tree: argument count != operation arity");
        std::vector<op_table> inner;
        inner.reserve(t.args.size());
        for (const comp_tree& a : t.args)
            inner.push_back(evaluate_tree(a, generators, q));
        for (const op_table& g : inner)
            if (g.arity() != inner.front().arity())
                throw std::invalid_argument("evaluate_tree: ragged argument arities");
        return compose(f, inner);
    }
    }
    throw std::logic_error("evaluate_tree: bad node kind");
}

nlohmann::json comp_tree_to_json(const comp_tree& t) {
    switch (t.node) {
    case comp_tree::kind::proj:
        return nlohmann::json{{"proj", {t.proj_arity, t.proj_index}}};
    case comp_tree::kind::gen:
        return nlohmann::json{{"gen", t.gen_index}};
    case comp_tree::kind::apply: {
        nlohmann::json args = nlohmann::json::array();
        for (const comp_tree& a : t.args)
            args.push_back(comp_tree_to_json(a));
        return nlohmann::json{{"apply", {{"op", comp_tree_to_json(t.op.front())},
                                         {"args", std::move(args)}}}};
    }
    }
    throw std::logic_error("comp_tree_to_json: bad node kind");
}

comp_tree comp_tree_from_json(const nlohmann::json& j) {
    if (j.contains("proj")) {
        const auto& p = j.at("proj");
        return comp_tree::proj(p.at(0).get<std::uint32_t>(), p.at(1).get<std::uint32_t>());
    }
    if (j.contains("gen"))
        return comp_tree::gen(j.at("gen").get<std::uint32_t>());
    if (j.contains("apply")) {
        const auto& a = j.at("apply");
        std::vector<comp_tree> args;
        for (const auto& c : a.at("args"))
            args.push_back(comp_tree_from_json(c));
        return comp_tree::apply(comp_tree_from_json(a.at("op")), std::move(args));
    }
    throw std::invalid_argument("comp_tree_from_json: unrecognized node");
}

} // namespace cloneforge
