#pragma once

#include "io.hpp"

#include <sstream>
#include <string>
#include <vector>

namespace gdyn {

inline const std::vector<std::string>& demo_names() {
    static const std::vector<std::string> names{"indivisible-2.4", "divisible-2.4", "network-2.5", "lindblad", "cptp"};
    return names;
}

// Pipelines each demo is meant to go through.
inline std::vector<Pipeline> demo_pipelines(const std::string& name) {
    if (name == "indivisible-2.4") return {Pipeline::A, Pipeline::C};
    if (name == "divisible-2.4") return {Pipeline::A, Pipeline::B, Pipeline::C};
    if (name == "network-2.5") return {Pipeline::A};
    if (name == "lindblad") return {Pipeline::A, Pipeline::B, Pipeline::C};
    if (name == "cptp") return {Pipeline::ACptp};
    throw InputError("unknown demo '" + name + "'");
}

namespace detail {

inline json kraus_json(const std::vector<CMatrix>& ks) {
    json out = json::array();
    for (const auto& k : ks) out.push_back(matrix_json(k));
    return out;
}

inline CMatrix hadamard() {
    CMatrix h(2, 2);
    h << 1, 1, 1, -1;
    return h / std::sqrt(2.0);
}

}  // namespace detail

inline json demo_spec(const std::string& name) {
    if (name == "indivisible-2.4") {
        return {{"schema_version", kSchemaVersion},
                {"name", name},
                {"hilbert_dim", 2},
                {"dim", 4},
                {"family",
                 {{"kind", "indivisible-example"},
                  {"h1", matrix_json(pauli::x())},
                  {"h2", matrix_json(pauli::z())},
                  {"t_max", "1"},
                  {"grid", {"0", "1/4", "1/2", "3/4", "1"}},
                  {"alpha", 1.0}}}};
    }
    if (name == "divisible-2.4") {
        Rng rng(2024);
        const CMatrix X = random_dissipative(rng, 3, 0.7);
        return {{"schema_version", kSchemaVersion},
                {"name", name},
                {"graph", {{"kind", "linear"}, {"direction", "ascending"}, {"nodes", {"0", "1/5", "2/5", "3/5", "4/5", "1"}}}},
                {"dim", 3},
                {"family", {{"kind", "exponential"}, {"alpha", 1.0}, {"generator", {{"kind", "constant"}, {"matrix", matrix_json(X)}}}}}};
    }
    if (name == "network-2.5") {
        const json w = matrix_json(2.0 * identity(2));
        return {{"schema_version", kSchemaVersion},
                {"name", name},
                {"graph", {{"kind", "edges"}, {"nodes", {"u", "v", "z", "w"}}, {"edges", {{"u", "v"}, {"v", "w"}, {"u", "z"}, {"z", "w"}}}}},
                {"dim", 2},
                {"family",
                 {{"kind", "network"},
                  {"weights", {{{"edge", {"u", "v"}}, {"matrix", w}}, {{"edge", {"v", "w"}}, {"matrix", w}},
                               {{"edge", {"u", "z"}}, {"matrix", w}}, {{"edge", {"z", "w"}}, {"matrix", w}}}}}}};
    }
    if (name == "lindblad") {
        CMatrix lower(2, 2);
        lower << 0, 1, 0, 0;
        return {{"schema_version", kSchemaVersion},
                {"name", name},
                {"flavor", "cstar"},
                {"graph", {{"kind", "linear"}, {"direction", "ascending"}, {"nodes", {"0", "1/4", "1/2", "3/4", "1"}}}},
                {"dim", 4},
                {"hilbert_dim", 2},
                {"family",
                 {{"kind", "exponential"},
                  {"alpha", 1.0},
                  {"generator",
                   {{"kind", "lindblad"},
                    {"h", matrix_json(0.5 * pauli::z() + 0.3 * pauli::x())},
                    {"kraus", detail::kraus_json({std::sqrt(0.6) * lower, std::sqrt(0.2) * pauli::z()})}}}}}};
    }
    if (name == "cptp") {
        const Channel damp = amplitude_damping(0.3);
        std::vector<CMatrix> rot{std::sqrt(0.8) * detail::hadamard(), std::sqrt(0.2) * pauli::y()};
        std::vector<CMatrix> depol{std::sqrt(0.625) * identity(2), std::sqrt(0.125) * pauli::x(), std::sqrt(0.125) * pauli::y(),
                                   std::sqrt(0.125) * pauli::z()};
        return {{"schema_version", kSchemaVersion},
                {"name", name},
                {"graph", {{"kind", "linear"}, {"order", {"a", "b", "c"}}}},
                {"dim", 4},
                {"hilbert_dim", 2},
                {"family",
                 {{"kind", "channels"},
                  {"values",
                   {{{"edge", {"a", "b"}}, {"repr", "kraus"}, {"data", detail::kraus_json(*damp.kraus)}},
                    {{"edge", {"b", "c"}}, {"repr", "kraus"}, {"data", detail::kraus_json(rot)}},
                    {{"edge", {"a", "c"}}, {"repr", "kraus"}, {"data", detail::kraus_json(depol)}}}}}}};
    }
    throw InputError("unknown demo '" + name + "'");
}

struct DemoOutput {
    json spec;
    json expected;
    std::string csv;
};

// Largest divisibility defect over composable triples, and where it occurs.
inline std::pair<double, std::string> worst_divisibility(const OperatorFamily& phi) {
    Check c = check_divisibility(phi, composable_triples(phi.context()), 0.0);
    return {std::max(0.0, c.max_defect), c.argmax};
}

inline DemoOutput run_demo(const std::string& name) {
    DemoOutput out;
    out.spec = demo_spec(name);
    LoadedSystem L = load_system(out.spec);
    const auto& sys = L.system;
    json exp = {{"schema_version", kSchemaVersion}, {"demo", name}};
    std::ostringstream csv;
    csv.precision(17);

    if (name == "indivisible-2.4" || name == "divisible-2.4" || name == "lindblad") {
        // divisibility defect of e^{αA} as α varies, at the worst triple for α = 1
        const auto [d1, where] = worst_divisibility(sys.phi);
        exp["divisibility_defect_alpha1"] = d1;
        exp["divisibility_argmax"] = where;
        csv << "alpha,max_divisibility_defect\n";
        for (int k = 0; k <= 40; ++k) {
            const double a = 0.25 * k;
            csv << a << "," << worst_divisibility(exponential_family(*sys.generators, a)).first << "\n";
        }
    }
    if (name == "indivisible-2.4") {
        const auto& ex = *L.example;
        const auto [c1, c2] = ex.coefficients(Rational(1), Rational(1, 2));
        exp["coefficients_t0_s0"] = {c1.str(), c2.str()};
        const CMatrix comm = commutator(ex.A(Rational(1), Rational(1, 2)), ex.A(Rational(1, 2), Rational(0)));
        const CMatrix target = cplx(-1.0 / 8.0) * SuperOp::commutator_with(commutator(ex.h1, ex.h2)).matrix;
        exp["commutator_defect"] = spectral_norm(comm - target);
        exp["divisibility_defect_1_half_0"] = divisibility_defect(sys.phi, Rational(1), Rational(1, 2), Rational(0));
    }
    if (name == "network-2.5") {
        const NodeId u = 0, v = 1, w = 3;
        exp["phi_u_w"] = matrix_json(sys.phi(u, w));
        exp["defect_u_v_w"] = matrix_json(network_defect(*L.network, u, v, w));
        exp["defect_matches_path_sum"] =
            spectral_norm(network_defect(*L.network, u, v, w) - (sys.phi(u, w) - sys.phi(u, v) * sys.phi(v, w))) == 0.0;
        csv << "u,v,w,defect_norm\n";
        for (const auto& [a, b, c] : composable_triples(sys.context()))
            csv << L.labels.name(a) << "," << L.labels.name(b) << "," << L.labels.name(c) << ","
                << spectral_norm(network_defect(*L.network, a, b, c)) << "\n";
    }
    if (name == "lindblad") {
        const GeneratorFamily& gen = *sys.generators;
        const NodeId a = sys.context().nodes().front(), b = sys.context().nodes().back();
        const SuperOp Lgen(2, gen(a, b));
        Rng rng(11);
        std::vector<CMatrix> samples;
        for (int i = 0; i < 16; ++i) samples.push_back(random_matrix(rng, 2));
        exp["schwarz_pass"] = check_schwarz_generator(Lgen, samples).pass();
        exp["L_of_identity"] = spectral_norm(Lgen.apply(identity(2)));
    }
    if (name == "cptp") {
        const NodeId a = 0, b = 1, c = 2;
        exp["indivisibility_defect_a_b_c"] = divisibility_defect(sys.phi, a, b, c);
        exp["noncommuting"] = spectral_norm(sys.phi(a, b) * sys.phi(b, c) - sys.phi(b, c) * sys.phi(a, b));
        csv << "u,v,w,divisibility_defect\n";
        for (const auto& [x, y, z] : composable_triples(sys.context()))
            csv << L.labels.name(x) << "," << L.labels.name(y) << "," << L.labels.name(z) << ","
                << divisibility_defect(sys.phi, x, y, z) << "\n";
    }
    json pipes = json::array();
    for (auto p : demo_pipelines(name)) pipes.push_back(to_string(p));
    exp["pipelines"] = pipes;
    out.expected = exp;
    out.csv = csv.str();
    return out;
}

}  // namespace gdyn
