#pragma once

#include "channel.hpp"
#include "dilate.hpp"
#include "dynamics.hpp"
#include "extend.hpp"
#include "report.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gdyn {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// Node labels: integers, "p/q", exact decimals, or free-form strings. Free-form labels get integer ids in
// order of first appearance and cannot be mixed with numeric labels.
class NodeLabels {
public:
    NodeId parse(const json& j) {
        if (j.is_number_integer()) return numeric(Rational(j.get<std::int64_t>()));
        if (j.is_number_float()) return numeric(Rational::parse(j.dump()));  // shortest round-trip decimal
        if (!j.is_string()) throw InputError("node label must be a number or a string");
        const std::string s = j.get<std::string>();
        try {
            return numeric(Rational::parse(s));
        } catch (const std::invalid_argument&) {
        } catch (const std::domain_error&) {
        }
        if (numeric_) throw InputError("free-form node label '" + s + "' mixed with numeric labels");
        free_ = true;
        auto [it, fresh] = free_ids_.emplace(s, static_cast<std::int64_t>(free_ids_.size()));
        if (fresh) names_.emplace(Rational(it->second), s);
        return Rational(it->second);
    }

    std::string name(const NodeId& n) const {
        auto it = names_.find(n);
        return it == names_.end() ? n.str() : it->second;
    }

    bool free_form() const { return free_; }

private:
    bool numeric_ = false, free_ = false;
    std::map<std::string, std::int64_t> free_ids_;
    std::map<NodeId, std::string> names_;

    NodeId numeric(const NodeId& n) {
        if (free_) throw InputError("numeric node label mixed with free-form labels");
        numeric_ = true;
        return n;
    }
};

// Matrix literal: array of rows; entries are numbers or [re, im].
inline CMatrix parse_matrix(const json& j) {
    if (!j.is_array() || j.empty()) throw InputError("matrix literal must be a non-empty array of rows");
    const std::size_t rows = j.size();
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    if (cols == 0) throw InputError("matrix literal rows must be non-empty arrays");
    CMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) throw InputError("matrix literal rows differ in length");
        for (std::size_t c = 0; c < cols; ++c) {
            const json& e = j[r][c];
            cplx v;
            if (e.is_number())
                v = e.get<double>();
            else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
                v = cplx(e[0].get<double>(), e[1].get<double>());
            else
                throw InputError("matrix entry must be a number or [re, im]");
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
        }
    }
    if (!all_finite(m)) throw InputError("matrix literal has non-finite entries");
    return m;
}

inline json matrix_json(const CMatrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            const cplx v = m(r, c);
            if (v.imag() == 0.0)
                row.push_back(v.real());
            else
                row.push_back({v.real(), v.imag()});
        }
        rows.push_back(row);
    }
    return rows;
}

inline json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json check_json(const Check& c) {
    return {{"name", c.name},       {"tol", c.tol},          {"samples", c.samples},
            {"violations", c.violations}, {"max_defect", number_or_null(c.max_defect)},
            {"argmax", c.argmax},   {"offenders", c.offenders}, {"note", c.note},
            {"pass", c.pass()}};
}

inline json report_json(const Report& r) {
    json checks = json::array();
    for (const auto& c : r.checks) checks.push_back(check_json(c));
    return {{"schema_version", kSchemaVersion}, {"name", r.name}, {"pass", r.pass()}, {"checks", checks}, {"notes", r.notes}};
}

// ---- system specs ------------------------------------------------------------------------------

struct LoadedSystem {
    DynamicalSystem system;
    NodeLabels labels;
    std::optional<TimeFamilyExample> example;
    std::optional<DagNetwork> network;
    json spec;
};

namespace detail {

inline std::vector<NodeId> parse_nodes(const json& arr, NodeLabels& labels) {
    if (!arr.is_array()) throw InputError("node list must be an array");
    std::vector<NodeId> out;
    for (const auto& x : arr) out.push_back(labels.parse(x));
    return out;
}

inline Edge parse_edge(const json& j, NodeLabels& labels) {
    if (!j.is_array() || j.size() != 2) throw InputError("edge must be a pair [u, v]");
    return {labels.parse(j[0]), labels.parse(j[1])};
}

inline std::shared_ptr<EdgeContext> parse_graph(const json& g, NodeLabels& labels) {
    const std::string kind = g.value("kind", "");
    if (kind == "linear") {
        if (g.contains("order")) return std::make_shared<EdgeContext>(EdgeContext::linear_order(parse_nodes(g.at("order"), labels)));
        const std::string dir = g.value("direction", "ascending");
        if (dir != "ascending" && dir != "descending") throw InputError("graph direction must be ascending or descending");
        auto nodes = parse_nodes(g.at("nodes"), labels);
        if (labels.free_form()) throw InputError("keyed linear orders need numeric labels; use \"order\"");
        return std::make_shared<EdgeContext>(
            EdgeContext::linear_order(std::move(nodes), dir == "ascending" ? Direction::Ascending : Direction::Descending));
    }
    if (kind == "complete") return std::make_shared<EdgeContext>(EdgeContext::complete(parse_nodes(g.at("nodes"), labels)));
    if (kind == "edges") {
        auto nodes = parse_nodes(g.at("nodes"), labels);
        std::vector<Edge> edges;
        for (const auto& e : g.at("edges")) edges.push_back(parse_edge(e, labels));
        return std::make_shared<EdgeContext>(EdgeContext::from_edges(std::move(nodes), edges));
    }
    throw InputError("unknown graph kind '" + kind + "'");
}

inline std::map<Edge, CMatrix> parse_edge_values(const json& arr, NodeLabels& labels, const char* key) {
    std::map<Edge, CMatrix> out;
    for (const auto& v : arr) {
        Edge e = parse_edge(v.at("edge"), labels);
        if (!out.emplace(e, parse_matrix(v.at(key))).second) throw InputError("duplicate value for edge " + edge_str(e.first, e.second));
    }
    return out;
}

inline EdgeEval table_eval(const EdgeContext& ctx, std::map<Edge, CMatrix> table, Eigen::Index dim, bool identity_default) {
    for (const auto& [e, m] : table) {
        if (!ctx.has_edge(e.first, e.second)) throw InputError("value given for non-edge " + edge_str(e.first, e.second));
        if (m.rows() != dim || m.cols() != dim) throw InputError("value at " + edge_str(e.first, e.second) + " is not dim x dim");
    }
    for (const auto& [u, v] : ctx.edges())
        if (!table.count({u, v}) && !(identity_default && u == v))
            throw InputError("no value for edge " + edge_str(u, v));
    return [table = std::move(table), dim](const NodeId& u, const NodeId& v) {
        auto it = table.find({u, v});
        return it == table.end() ? identity(dim) : it->second;
    };
}

inline double key_distance(const NodeId& u, const NodeId& v) { return std::abs((v - u).to_double()); }

}  // namespace detail

inline LoadedSystem load_system(const json& spec) {
    LoadedSystem L;
    L.spec = spec;
    auto& sys = L.system;
    sys.name = spec.value("name", "system");
    const std::string flavor = spec.value("flavor", "banach");
    if (flavor == "cstar")
        sys.flavor = Flavor::CStar;
    else if (flavor != "banach")
        throw InputError("flavor must be banach or cstar");
    if (!spec.contains("family")) throw InputError("system spec has no family");
    const json& fam = spec.at("family");
    const std::string kind = fam.value("kind", "");
    std::optional<Eigen::Index> hdim;
    if (spec.contains("hilbert_dim")) hdim = spec.at("hilbert_dim").get<Eigen::Index>();

    if (kind == "indivisible-example") {
        const CMatrix h1 = parse_matrix(fam.at("h1")), h2 = parse_matrix(fam.at("h2"));
        const Rational tmax = L.labels.parse(fam.value("t_max", json("1")));
        std::vector<NodeId> grid;
        if (fam.contains("grid")) grid = detail::parse_nodes(fam.at("grid"), L.labels);
        L.example = example_indivisible(h1, h2, tmax, grid, fam.value("require_noncentral", true));
        sys.alpha = fam.value("alpha", 1.0);
        sys.generators = L.example->generators();
        sys.phi = exponential_family(*sys.generators, sys.alpha);
        sys.length = L.example->length(sys.alpha);
        return L;
    }

    if (kind == "network") {
        if (!spec.contains("graph")) throw InputError("network spec needs a graph with nodes and edges");
        const json& g = spec.at("graph");
        auto nodes = detail::parse_nodes(g.at("nodes"), L.labels);
        auto weights = detail::parse_edge_values(fam.at("weights"), L.labels, "matrix");
        L.network = DagNetwork(nodes, weights);
        sys.phi = network_family(*L.network);
        return L;
    }

    if (!spec.contains("graph")) throw InputError("system spec has no graph");
    auto ctx = detail::parse_graph(spec.at("graph"), L.labels);
    if (!spec.contains("dim")) throw InputError("system spec has no dim");
    const Eigen::Index dim = spec.at("dim").get<Eigen::Index>();
    if (dim <= 0) throw InputError("dim must be positive");
    if (hdim && (*hdim) * (*hdim) != dim) throw InputError("hilbert_dim squared must equal dim");

    if (kind == "explicit") {
        sys.phi = OperatorFamily(ctx, dim, detail::table_eval(*ctx, detail::parse_edge_values(fam.at("values"), L.labels, "matrix"), dim, false));
        sys.phi.hilbert_dim = hdim;
    } else if (kind == "channels") {
        if (!hdim) throw InputError("channel families need hilbert_dim");
        std::map<Edge, CMatrix> table;
        for (const auto& v : fam.at("values")) {
            Edge e = detail::parse_edge(v.at("edge"), L.labels);
            const std::string repr = v.value("repr", "kraus");
            Channel ch;
            if (repr == "kraus") {
                std::vector<CMatrix> ks;
                for (const auto& k : v.at("data")) ks.push_back(parse_matrix(k));
                ch = Channel::from_kraus(ks);
            } else if (repr == "choi") {
                ch = Channel::from_choi(parse_matrix(v.at("data")));
            } else {
                throw InputError("channel repr must be kraus or choi");
            }
            if (ch.dim != *hdim) throw InputError("channel at " + edge_str(e.first, e.second) + " has the wrong dimension");
            table.emplace(e, ch.superop().matrix);
        }
        sys.phi = OperatorFamily(ctx, dim, detail::table_eval(*ctx, std::move(table), dim, true));
        sys.phi.hilbert_dim = hdim;
        sys.channels = true;
    } else if (kind == "exponential") {
        sys.alpha = fam.value("alpha", 1.0);
        const json& g = fam.at("generator");
        const std::string gk = g.value("kind", "");
        double rate = std::numeric_limits<double>::quiet_NaN();
        if (gk == "constant" || gk == "lindblad") {
            CMatrix X;
            if (gk == "constant") {
                X = parse_matrix(g.at("matrix"));
            } else {
                if (!hdim) throw InputError("lindblad generators need hilbert_dim");
                std::vector<CMatrix> ks;
                for (const auto& k : g.at("kraus")) ks.push_back(parse_matrix(k));
                X = lindblad_generator(parse_matrix(g.at("h")), heisenberg_kraus_map(ks)).matrix;
            }
            if (X.rows() != dim || X.cols() != dim) throw InputError("generator is not dim x dim");
            ctx->require_linear("constant generator");
            sys.generators = GeneratorFamily(ctx, dim, [X](const NodeId& u, const NodeId& v) {
                return CMatrix(detail::key_distance(u, v) * X);
            });
            rate = std::abs(sys.alpha) * spectral_norm(X);
            if (sys.flavor == Flavor::CStar && hdim) rate *= std::sqrt(static_cast<double>(*hdim));
        } else if (gk == "explicit") {
            sys.generators = GeneratorFamily(ctx, dim, detail::table_eval(*ctx, detail::parse_edge_values(g.at("values"), L.labels, "matrix"), dim, false));
        } else {
            throw InputError("unknown generator kind '" + gk + "'");
        }
        sys.generators->hilbert_dim = hdim;
        bool dissipative = true;
        for (const auto& [u, v] : ctx->edges()) dissipative = dissipative && is_dissipative_hilbert((*sys.generators)(u, v));
        sys.generators->dissipative_flag = dissipative;
        sys.phi = exponential_family(*sys.generators, sys.alpha);
        if (std::isfinite(rate)) sys.length = linear_length(rate);
    } else {
        throw InputError("unknown family kind '" + kind + "'");
    }
    if (spec.contains("length")) sys.length = linear_length(spec.at("length").at("rate").get<double>());
    return L;
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError("malformed JSON in " + path + ": " + e.what());
    }
}

inline Word parse_word(const json& j, NodeLabels& labels) {
    if (!j.is_array()) throw InputError("word must be an array of [tail, head] pairs");
    Word w;
    for (const auto& l : j) {
        Edge e = detail::parse_edge(l, labels);
        w.push_back({e.first, e.second});
    }
    return w;
}

inline json word_json(const Word& w, const NodeLabels& labels) {
    json out = json::array();
    for (const auto& l : w) out.push_back({labels.name(l.tail), labels.name(l.head)});
    return out;
}

}  // namespace gdyn
