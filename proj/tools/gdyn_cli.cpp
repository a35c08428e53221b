#include "gdyn/gdyn.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

using namespace gdyn;

namespace {

enum Exit { kPass = 0, kInput = 2, kPrecondition = 3, kVerification = 4 };

struct Common {
    std::string input;
    std::string demo;
    std::string output;
    double tol = 1e-10;
    std::size_t samples = 200;
    std::uint64_t seed = 1;
};

LoadedSystem load(const Common& c) {
    if (!c.demo.empty() && !c.input.empty()) throw InputError("give either --input or --demo, not both");
    if (!c.demo.empty()) return load_system(demo_spec(c.demo));
    if (c.input.empty()) throw InputError("no system given (--input or --demo)");
    return load_system(read_json_file(c.input));
}

void emit(const json& j, const std::string& path) {
    std::cout << j.dump(2) << "\n";
    if (!path.empty()) {
        std::ofstream out(path);
        if (!out) throw InputError("cannot write " + path);
        out << j.dump(2) << "\n";
    }
}

void add_common(CLI::App* app, Common& c, bool system = true) {
    if (system) {
        app->add_option("--input", c.input, "system spec (JSON)");
        app->add_option("--demo", c.demo, "use a built-in demo system instead of --input");
    }
    app->add_option("--output", c.output, "also write the report here");
    app->add_option("--tol", c.tol, "tolerance")->capture_default_str();
    app->add_option("--samples", c.samples, "sample count")->capture_default_str();
    app->add_option("--seed", c.seed, "random seed")->capture_default_str();
}

VerifyOptions options(const Common& c) {
    VerifyOptions o;
    o.seed = c.seed;
    o.samples = c.samples;
    o.tol = c.tol;
    return o;
}

const char* kind_name(ReductionStep::Kind k) { return k == ReductionStep::Loop ? "loop" : "fuse"; }

int cmd_normalize(const Common& c, const std::string& word_lit, bool trace) {
    LoadedSystem L = load(c);
    const Word w = parse_word(json::parse(word_lit), L.labels);
    std::vector<ReductionStep> steps;
    const GroupElement g = normalize(L.system.context(), w, trace ? &steps : nullptr);
    json out = {{"schema_version", kSchemaVersion}, {"input", word_json(w, L.labels)}, {"normal_form", word_json(g.normal_form, L.labels)}};
    if (trace) {
        json t = json::array();
        for (const auto& s : steps)
            t.push_back({{"rule", kind_name(s.kind)}, {"position", s.position}, {"word", word_json(s.result, L.labels)}});
        out["trace"] = t;
    }
    emit(out, c.output);
    return kPass;
}

int cmd_group(const Common& c, const std::string& op, const std::string& a_lit, const std::string& b_lit) {
    LoadedSystem L = load(c);
    const auto& ctx = L.system.context();
    const GroupElement a = normalize(ctx, parse_word(json::parse(a_lit), L.labels));
    GroupElement r;
    if (op == "mul") {
        if (b_lit.empty()) throw InputError("group mul needs --b");
        r = mul(ctx, a, normalize(ctx, parse_word(json::parse(b_lit), L.labels)));
    } else if (op == "inv") {
        r = inv(a);
    } else {
        throw InputError("group operation must be mul or inv");
    }
    emit({{"schema_version", kSchemaVersion}, {"op", op}, {"result", word_json(r.normal_form, L.labels)}}, c.output);
    return kPass;
}

int cmd_check(const Common& c) {
    LoadedSystem L = load(c);
    const auto& sys = L.system;
    const auto& ctx = sys.context();
    const auto triples = composable_triples(ctx);
    const auto edges = ctx.edges();
    Report rep("axiom check: " + sys.name);
    bool diagonal = false;
    for (const auto& u : ctx.nodes()) diagonal = diagonal || ctx.has_edge(u, u);
    if (diagonal)
        for (auto& ch : check_identity_axiom(sys.phi, c.tol).checks) rep.add(std::move(ch));
    rep.add(check_divisibility(sys.phi, triples, c.tol));
    if (sys.generators) {
        rep.add(check_additivity(*sys.generators, triples, 1e-9));
        if (sys.flavor == Flavor::Banach) rep.add(check_dissipative(*sys.generators, edges, c.tol));
    }
    const PayloadSpace sp = sys.space();
    Rng rng(c.seed);
    Check con("||phi(u,v)|| - 1", c.tol);
    for (const auto& [u, v] : edges) con.add(sp.op_norm(sys.phi(u, v), rng) - 1.0, edge_str(u, v));
    if (sp.flavor == Flavor::CStar) con.note = "operator norm on M_h, sampled";
    rep.add(std::move(con));
    if (sys.length) {
        Check growth("||phi(u,v) - 1|| - l(u,v)", c.tol);
        for (const auto& [u, v] : edges)
            growth.add(sp.op_norm(sys.phi(u, v) - identity(sys.phi.dim()), rng) - (*sys.length)(u, v), edge_str(u, v));
        rep.add(std::move(growth));
        rep.add(check_length_kind(*sys.length, ctx, triples));
    }
    if (L.network) {
        Check net("network defect = paths avoiding v", 1e-12);
        for (const auto& [u, v, w] : triples)
            net.add(spectral_norm(network_defect(*L.network, u, v, w) - (sys.phi(u, w) - sys.phi(u, v) * sys.phi(v, w))),
                    triple_str(u, v, w));
        rep.add(std::move(net));
    }
    if (sys.channels) {
        Check cp("CPTP edge values", c.tol);
        for (const auto& [u, v] : edges)
            cp.add_flag(check_cptp(Channel::from_superop(SuperOp(*sys.phi.hilbert_dim, sys.phi(u, v))), c.tol).pass(), edge_str(u, v));
        rep.add(std::move(cp));
    }
    if (L.example) {
        const auto [c1, c2] = L.example->coefficients(L.example->t_max, L.example->t_max * Rational(1, 2));
        rep.notes.push_back("A(t_max, t_max/2) = " + c1.str() + " Psi1 + " + c2.str() + " Psi2");
    }
    emit(report_json(rep), c.output);
    return kPass;
}

int cmd_extend(const Common& c, const std::string& word_lit, const std::string& which) {
    LoadedSystem L = load(c);
    const auto& sys = L.system;
    const auto& ctx = sys.context();
    const GroupElement g = normalize(ctx, parse_word(json::parse(word_lit), L.labels));
    json out = {{"schema_version", kSchemaVersion}, {"element", word_json(g.normal_form, L.labels)}, {"extension", which}};
    if (ctx.is_linear_order()) out["cover"] = json::parse(cover_json(cover_of(ctx, g)));
    if (which == "normal") {
        out["value"] = matrix_json(NormalFormExtension(sys.phi, c.tol)(g));
    } else if (which == "first") {
        out["value"] = matrix_json(FirstCoverExtension(sys.phi)(g));
    } else if (which == "second") {
        if (!sys.generators) throw PreconditionError("generators", "second cover extension needs a generator family");
        const auto mode = sys.flavor == Flavor::CStar ? SecondCoverExtension::Dissipativity::Schwarz
                                                      : SecondCoverExtension::Dissipativity::Hilbert;
        SecondCoverExtension ext(*sys.generators, sys.alpha, mode, 1e-9, c.seed);
        out["generator"] = matrix_json(ext.generator(g));
        out["value"] = matrix_json(ext(g));
    } else {
        throw InputError("--extension must be normal, first or second");
    }
    emit(out, c.output);
    return kPass;
}

Pipeline parse_pipeline(const std::string& s) {
    if (s == "A") return Pipeline::A;
    if (s == "B") return Pipeline::B;
    if (s == "C") return Pipeline::C;
    if (s == "A-cptp") return Pipeline::ACptp;
    throw InputError("unknown pipeline '" + s + "'");
}

int cmd_dilate(const Common& c, const std::string& pipeline, const std::string& flavor) {
    LoadedSystem L = load(c);
    if (flavor == "cstar")
        L.system.flavor = Flavor::CStar;
    else if (flavor == "banach")
        L.system.flavor = Flavor::Banach;
    else if (!flavor.empty())
        throw InputError("--flavor must be banach or cstar");
    const DilatedSystem ds = run_pipeline(parse_pipeline(pipeline), L.system, options(c));
    const Report rep = ds.verify(options(c));
    json out = report_json(rep);
    out["pipeline"] = pipeline;
    out["flavor"] = L.system.flavor == Flavor::CStar ? "cstar" : "banach";
    if (ds.stroescu) out["isometric"] = ds.stroescu->isometric();
    if (ds.ved) out["environment_dim"] = ds.ved->env_dim();
    emit(out, c.output);
    return rep.pass() ? kPass : kVerification;
}

int cmd_demo(const std::string& name, const std::string& dir) {
    const DemoOutput d = run_demo(name);
    if (dir.empty()) {
        std::cout << d.spec.dump(2) << "\n";
        return kPass;
    }
    std::filesystem::create_directories(dir);
    const std::filesystem::path base = std::filesystem::path(dir) / name;
    auto write = [](const std::filesystem::path& p, const std::string& s) {
        std::ofstream out(p);
        if (!out) throw InputError("cannot write " + p.string());
        out << s;
    };
    write(base.string() + ".spec.json", d.spec.dump(2) + "\n");
    write(base.string() + ".expected.json", d.expected.dump(2) + "\n");
    if (!d.csv.empty()) write(base.string() + ".sweep.csv", d.csv);
    std::cout << d.expected.dump(2) << "\n";
    return kPass;
}

// Every demo through each of its pipelines, plus the one-parameter factorization on the time families.
int cmd_verify(const Common& c) {
    json runs = json::array();
    bool ok = true;
    for (const auto& name : demo_names()) {
        LoadedSystem L = load_system(demo_spec(name));
        for (auto p : demo_pipelines(name)) {
            const DilatedSystem ds = run_pipeline(p, L.system, options(c));
            const Report rep = ds.verify(options(c));
            ok = ok && rep.pass();
            json r = report_json(rep);
            if (L.system.context().is_linear_order() && ds.stroescu) {
                const auto& nodes = L.system.context().nodes();
                const NodeId t0 = std::min(nodes.front(), nodes.back());
                const OneParamReport op = one_param_factorization(ds, t0);
                ok = ok && op.report.pass();
                r["one_parameter"] = report_json(op.report);
                r["semigroup_defect"] = number_or_null(op.semigroup.max_defect);
            }
            runs.push_back(r);
        }
    }
    emit({{"schema_version", kSchemaVersion}, {"pass", ok}, {"runs", runs}}, c.output);
    return ok ? kPass : kVerification;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dynamical systems on graphs: normal forms, extensions and dilations"};
    app.require_subcommand(1);
    Common c;
    std::string word, word_b, which = "normal", pipeline, flavor, demo_name, group_op;
    bool trace = false;

    auto* norm = app.add_subcommand("normalize", "normal form of a word");
    add_common(norm, c);
    norm->add_option("--word", word, "JSON array of [tail, head] letters")->required();
    norm->add_flag("--trace", trace, "print one witnessing reduction sequence");

    auto* group = app.add_subcommand("group", "edge group operations");
    add_common(group, c);
    group->add_option("op", group_op, "mul or inv")->required();
    group->add_option("--a", word, "first element (word)")->required();
    group->add_option("--b", word_b, "second element (word)");

    auto* check = app.add_subcommand("check", "axiom report for a system");
    add_common(check, c);

    auto* extend = app.add_subcommand("extend", "value of an extension at a group element");
    add_common(extend, c);
    extend->add_option("--word", word, "element as a word")->required();
    extend->add_option("--extension", which, "normal, first or second")->capture_default_str();

    auto* dilate = app.add_subcommand("dilate", "run a dilation pipeline and verify it");
    add_common(dilate, c);
    dilate->add_option("--pipeline", pipeline, "A, B, C or A-cptp")->required();
    dilate->add_option("--flavor", flavor, "banach or cstar (overrides the spec)");

    auto* demo = app.add_subcommand("demo", "write a built-in demo system");
    demo->add_option("name", demo_name, "indivisible-2.4, divisible-2.4, network-2.5, lindblad or cptp")->required();
    demo->add_option("--output", c.output, "output directory");

    auto* verify = app.add_subcommand("verify", "built-in self verification");
    add_common(verify, c, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kPass : kInput;
    }

    try {
        if (*norm) return cmd_normalize(c, word, trace);
        if (*group) return cmd_group(c, group_op, word, word_b);
        if (*check) return cmd_check(c);
        if (*extend) return cmd_extend(c, word, which);
        if (*dilate) return cmd_dilate(c, pipeline, flavor);
        if (*demo) return cmd_demo(demo_name, c.output);
        if (*verify) return cmd_verify(c);
    } catch (const PreconditionError& e) {
        std::cerr << "precondition failed [" << e.axiom << "]: " << e.what() << "\n";
        return kPrecondition;
    } catch (const NotCptpError& e) {
        std::cerr << "precondition failed [cptp]: " << e.what() << "\n";
        return kPrecondition;
    } catch (const json::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInput;
    }
    return kInput;
}
