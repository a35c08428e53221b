// Acceptance suite: one PASS/FAIL line per criterion, with the detail lines above it.

#include "gdyn/gdyn.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

using namespace gdyn;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> details;

    void require(bool ok, const std::string& what) {
        pass = pass && ok;
        details.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    }
};

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

std::string check_line(const Check& c) {
    return c.name + ": " + std::to_string(c.samples) + " samples, " + std::to_string(c.violations) +
           " violations, max " + fmt("%.3e", c.max_defect);
}

void require_check(Outcome& o, const Check& c) { o.require(c.pass(), check_line(c)); }

void require_report(Outcome& o, const Report& r) {
    for (const auto& c : r.checks) require_check(o, c);
}

EdgeContext random_graph(std::uint64_t seed, int n, double p) {
    Rng rng(seed);
    std::bernoulli_distribution coin(p);
    std::vector<NodeId> nodes;
    for (int i = 0; i < n; ++i) nodes.push_back(Rational(i));
    std::vector<Edge> edges;
    for (const auto& u : nodes)
        for (const auto& v : nodes)
            if (!(u == v) && coin(rng)) edges.push_back({u, v});
    return EdgeContext::from_edges(nodes, edges);
}

std::vector<NodeId> int_nodes(int n) {
    std::vector<NodeId> out;
    for (int i = 0; i < n; ++i) out.push_back(Rational(i));
    return out;
}

struct NamedGraph {
    std::string name;
    EdgeContext ctx;
    std::size_t max_len;
};

std::vector<NamedGraph> graph_suite() {
    return {{"3-node clique", EdgeContext::complete(int_nodes(3)), 5},
            {"4-node linear order", EdgeContext::linear_order(int_nodes(4)), 6},
            {"5-node random", random_graph(5, 5, 0.3), 5}};
}

Outcome confluence() {
    Outcome o;
    Rng rng(101);
    for (const auto& g : graph_suite()) {
        const ConfluenceReport r = check_confluence_bruteforce(g.ctx, g.max_len);
        o.require(r.pass(), g.name + ": " + std::to_string(r.words_checked) + " words up to length " +
                                std::to_string(g.max_len) + " over " + std::to_string(r.alphabet_size) + " letters, " +
                                std::to_string(r.violations) + " violations");
        // explicit breadth-first closure on a sample of the longest words
        std::size_t bad = 0;
        for (int i = 0; i < 300; ++i) {
            const Word w = random_word(g.ctx, rng, g.max_len);
            const auto terminals = irreducible_descendants(g.ctx, w);
            if (terminals.size() != 1 || *terminals.begin() != normalize(g.ctx, w).normal_form) ++bad;
        }
        o.require(bad == 0, g.name + ": breadth-first closure of 300 sampled words, " + std::to_string(bad) + " mismatches");
    }
    return o;
}

Outcome group_laws() {
    Outcome o;
    Rng rng(202);
    for (const auto& g : graph_suite()) {
        const auto& ctx = g.ctx;
        std::size_t assoc = 0, unit = 0, inverse = 0;
        const GroupElement one = identity_element();
        for (int i = 0; i < 10000; ++i) {
            const GroupElement a = random_element(ctx, rng, 6), b = random_element(ctx, rng, 6), c = random_element(ctx, rng, 6);
            if (!(mul(ctx, mul(ctx, a, b), c) == mul(ctx, a, mul(ctx, b, c)))) ++assoc;
            if (!(mul(ctx, a, one) == a) || !(mul(ctx, one, a) == a)) ++unit;
            if (!mul(ctx, a, inv(a)).is_identity() || !mul(ctx, inv(a), a).is_identity()) ++inverse;
        }
        o.require(assoc + unit + inverse == 0, g.name + ": 10^4 triples, associativity/unit/inverse failures " +
                                                   std::to_string(assoc) + "/" + std::to_string(unit) + "/" +
                                                   std::to_string(inverse));
        if (ctx.is_linear_order()) {
            std::size_t bad = 0, n = 0;
            for (const auto& [u, v, w] : composable_triples(ctx)) {
                ++n;
                if (!(mul(ctx, iota(ctx, u, v), iota(ctx, v, w)) == iota(ctx, u, w))) ++bad;
            }
            o.require(bad == 0, g.name + ": iota(u,v) iota(v,w) = iota(u,w) on " + std::to_string(n) + " triples");
        }
    }
    return o;
}

Outcome perturbation() {
    Outcome o;
    Rng rng(303);
    std::uniform_int_distribution<int> dim(2, 6);
    std::uniform_real_distribution<double> scale(0.1, 2.0);
    Check c("||e^(X+Y) - e^X|| - ||Y||", 1e-10);
    for (int i = 0; i < 200; ++i) {
        const int d = dim(rng);
        const CMatrix X = random_dissipative(rng, d, scale(rng)), Y = random_dissipative(rng, d, scale(rng));
        c.add(spectral_norm(expm(X + Y) - expm(X)) - spectral_norm(Y), "pair " + std::to_string(i) + " d=" + std::to_string(d));
    }
    require_check(o, c);
    return o;
}

Outcome derivative() {
    Outcome o;
    Rng rng(404);
    std::uniform_int_distribution<int> dim(2, 5);
    std::uniform_real_distribution<double> tdist(-1.0, 1.0);
    Check c("||quadrature - central difference||", 1e-6);
    const double h = 1e-5;
    for (int i = 0; i < 50; ++i) {
        const int d = dim(rng);
        const CMatrix X = random_matrix(rng, d), Y = random_matrix(rng, d);
        const double t = tdist(rng);
        const CMatrix fd = (expm(X + (t + h) * Y) - expm(X + (t - h) * Y)) / (2 * h);
        c.add(spectral_norm(exp_derivative(X, Y, t) - fd), "sample " + std::to_string(i) + " d=" + std::to_string(d));
    }
    require_check(o, c);
    return o;
}

// Divisibility defect of the two-Hamiltonian time family at (1, 1/2, 0), alpha = 1, recorded on first run.
constexpr double kRecordedDefect = 0.23850117206557245;

Outcome regression() {
    Outcome o;
    const TimeFamilyExample ex = example_indivisible(pauli::x(), pauli::z(), Rational(1));
    const auto [c1, c2] = ex.coefficients(Rational(1), Rational(1, 2));
    o.require(c1 == Rational(3, 8) && c2 == Rational(1, 8), "coefficients at (1, 1/2) = (" + c1.str() + ", " + c2.str() + ")");
    const CMatrix comm = commutator(ex.A(Rational(1), Rational(1, 2)), ex.A(Rational(1, 2), Rational(0)));
    const CMatrix target = cplx(-1.0 / 8.0) * SuperOp::commutator_with(commutator(ex.h1, ex.h2)).matrix;
    const double cd = spectral_norm(comm - target);
    o.require(cd <= 1e-12, "commutator defect " + fmt("%.3e", cd));
    const OperatorFamily phi = exponential_family(ex.generators(), 1.0);
    const double dd = divisibility_defect(phi, Rational(1), Rational(1, 2), Rational(0));
    o.require(dd > 1e-3, "divisibility defect at (1, 1/2, 0) = " + fmt("%.17g", dd) + " > 1e-3");
    o.require(std::abs(dd - kRecordedDefect) <= 1e-12, "matches recorded value " + fmt("%.17g", kRecordedDefect));
    return o;
}

Outcome cover_well_defined() {
    Outcome o;
    Rng rng(606);
    const LoadedSystem div = load_system(demo_spec("divisible-2.4"));
    const auto& dctx = div.system.context();
    const FirstCoverExtension first(div.system.phi);
    const SecondCoverExtension second_div(*div.system.generators, div.system.alpha);

    const TimeFamilyExample ex = example_indivisible(pauli::x(), pauli::z(), Rational(1), uniform_grid(Rational(0), Rational(1), 5));
    const SecondCoverExtension second_t(ex.generators(), 1.0);
    const EdgeContext& tctx = *ex.ctx;

    o.require(dctx.size() == 6 && tctx.size() == 6, "both orders have 6 points");
    Check r1("first cover: refinement independence", 1e-12), r2("second cover: refinement independence", 1e-12),
        r3("second cover (time family): refinement independence", 1e-12), cy1("first cover: cyclic invariance", 1e-12),
        cy2("second cover: cyclic invariance", 1e-12), cy3("second cover (time family): cyclic invariance", 1e-12);
    for (int i = 0; i < 1000; ++i) {
        const std::string where = "element " + std::to_string(i);
        const GroupElement g = random_element(dctx, rng, 6), h = random_element(dctx, rng, 6);
        const Refinement ref = refine(dctx, cover_of(dctx, g), random_extra_nodes(dctx, rng));
        r1.add(spectral_norm(first(g) - first.evaluate(ref)), where);
        r2.add(spectral_norm(second_div(g) - second_div.evaluate(ref)), where);
        cy1.add(spectral_norm(first(mul(dctx, g, h)) - first(mul(dctx, h, g))), where);
        cy2.add(spectral_norm(second_div(mul(dctx, g, h)) - second_div(mul(dctx, h, g))), where);

        const GroupElement a = random_element(tctx, rng, 6), b = random_element(tctx, rng, 6);
        const Refinement tref = refine(tctx, cover_of(tctx, a), random_extra_nodes(tctx, rng));
        r3.add(spectral_norm(second_t(a) - second_t.evaluate(tref)), where);
        cy3.add(spectral_norm(second_t(mul(tctx, a, b)) - second_t(mul(tctx, b, a))), where);
    }
    for (const Check* c : {&r1, &r2, &r3, &cy1, &cy2, &cy3}) require_check(o, *c);
    return o;
}

Outcome continuity() {
    Outcome o;
    VerifyOptions opt;
    opt.seed = 707;
    opt.samples = 1000;
    const LoadedSystem ind = load_system(demo_spec("indivisible-2.4"));
    const DilatedSystem c = run_pipeline(Pipeline::C, ind.system, opt);
    Rng rng(opt.seed);
    const auto sc = random_continuity_samples(c.context(), c.stroescu->space(), rng, 1000, 4);
    require_check(o, continuity_modulus_check(c.phibar, c.context(), *ind.system.length, CoverKind::Second,
                                              c.stroescu->space(), sc));
    const LoadedSystem div = load_system(demo_spec("divisible-2.4"));
    const DilatedSystem b = run_pipeline(Pipeline::B, div.system, opt);
    const auto sb = random_continuity_samples(b.context(), b.stroescu->space(), rng, 1000, 4);
    require_check(o, continuity_modulus_check(b.phibar, b.context(), *div.system.length, CoverKind::First,
                                              b.stroescu->space(), sb));
    return o;
}

Outcome pipelines() {
    Outcome o;
    for (const auto& name : demo_names()) {
        const LoadedSystem L = load_system(demo_spec(name));
        for (auto p : demo_pipelines(name)) {
            const DilatedSystem ds = run_pipeline(p, L.system);
            const Report rep = ds.verify();
            std::size_t failed = 0;
            double comp = 0.0;
            for (const auto& c : rep.checks) {
                if (!c.pass()) {
                    ++failed;
                    o.details.push_back("     " + check_line(c));
                }
                if (c.name.find("||j U(e) r - phi(e)||") != std::string::npos || c.name.find("tr2(ad_U(e)") != std::string::npos)
                    comp = std::max(comp, c.max_defect);
            }
            o.require(failed == 0, name + " via " + to_string(p) + ": " + std::to_string(rep.checks.size()) +
                                       " checks, compression defect " + fmt("%.3e", comp));
        }
    }
    return o;
}

Outcome kraus_suite() {
    Outcome o;
    Rng rng(909);
    for (Eigen::Index d : {2, 3, 4}) {
        std::uniform_int_distribution<Eigen::Index> rank(1, d * d);
        Check rec("Kraus I reconstruction", 1e-10), norm("Kraus I normalization", 1e-10), part("isometric partition", 1e-10),
            rec2("Kraus II tr2 reconstruction", 1e-10), sq("||u^2 - 1||", 1e-10), sa("||u - u*||", 1e-10);
        for (int i = 0; i < 50; ++i) {
            const std::string where = "d=" + std::to_string(d) + " #" + std::to_string(i);
            const Channel given = random_channel(rng, d, rank(rng));
            // Kraus I from the Choi matrix alone
            const Channel ch = kraus_from_choi(Channel{given.dim, given.choi, std::nullopt});
            const Report cp = check_cptp(ch);
            rec.add(cp.find("max ||Phi(E_ij) - sum K E_ij K*||_1")->max_defect, where);
            norm.add(cp.find("||sum K*K - 1||")->max_defect, where);
            const Report ip = check_isometric_partition(isometric_partition(*ch.kraus), *ch.kraus, 1e-10);
            double ipd = 0.0;
            for (const auto& c : ip.checks) ipd = std::max(ipd, c.max_defect);
            part.add(ipd, where);

            const KrausDilation kd = kraus_ii_dilation(given, random_unit_vector(rng, d));
            const Report kr = check_kraus_dilation(kd, given);
            rec2.add(kr.find("max ||Phi(E_ij) - tr2(ad_u(E_ij x w))||_1")->max_defect, where);
            sq.add(kr.find("||u^2 - 1||")->max_defect, where);
            sa.add(kr.find("||u - u*||")->max_defect, where);
        }
        o.details.push_back("d = " + std::to_string(d));
        for (const Check* c : {&rec, &norm, &part, &rec2, &sq, &sa}) require_check(o, *c);
    }
    return o;
}

Outcome ved_suite() {
    Outcome o;
    const LoadedSystem L = load_system(demo_spec("cptp"));
    const DilatedSystem ds = run_pipeline(Pipeline::ACptp, L.system);
    const auto& ctx = ds.context();
    const VedDilation& ved = *ds.ved;
    const Eigen::Index d = ved.d();
    const NodeId a = 0, b = 1, c = 2;
    const double nc = spectral_norm(L.system.phi(a, b) * L.system.phi(b, c) - L.system.phi(b, c) * L.system.phi(a, b));
    o.require(nc > 1e-3, "assignments on (a,b) and (b,c) do not commute: " + fmt("%.3e", nc));

    // every element of word length <= 3
    std::set<GroupElement> elements{identity_element()};
    const auto alpha = ctx.alphabet();
    std::vector<Word> layer{{}};
    for (int len = 1; len <= 3; ++len) {
        std::vector<Word> next;
        for (const auto& w : layer)
            for (const auto& l : alpha) {
                Word x = w;
                x.push_back(l);
                elements.insert(normalize(ctx, x));
                next.push_back(std::move(x));
            }
        layer = std::move(next);
    }
    Check ver("ved_verify on matrix units", 1e-10);
    for (const auto& x : elements) {
        double worst = 0.0;
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < d; ++j) worst = std::max(worst, ved.verify(x, matrix_unit(d, i, j)));
        ver.add(worst, to_string(x));
    }
    o.details.push_back(std::to_string(elements.size()) + " distinct elements of word length <= 3");
    require_check(o, ver);

    Rng rng(1010);
    Check law_tags("representation law on tags", 0.0), law_pay("representation law on payloads", 1e-12);
    for (int i = 0; i < 1000; ++i) {
        const GroupElement x = random_element(ctx, rng, 3), y = random_element(ctx, rng, 3), z = random_element(ctx, rng, 3);
        const FormalVector v{{{z, CMatrix(random_unit_vector(rng, ved.payload_dim()))}}};
        const FormalVector lhs = ved.apply(x, ved.apply(y, v)), rhs = ved.apply(mul(ctx, x, y), v);
        const std::string where = "sample " + std::to_string(i);
        law_tags.add_flag(lhs.tags() == rhs.tags(), where);
        law_pay.add(spectral_norm(lhs.terms[0].second - rhs.terms[0].second), where);
    }
    require_check(o, law_tags);
    require_check(o, law_pay);

    // Φ_{gh} against Φ_g ∘ Φ_h, both read off the dilation
    const GroupElement g = iota(ctx, a, b), h = iota(ctx, b, c);
    const CMatrix gh = ds.compressed({mul(ctx, g, h)}), g_h = ds.compressed({g}) * ds.compressed({h});
    const double dil_defect = spectral_norm(gh - g_h);
    const double own = divisibility_defect(L.system.phi, a, b, c);
    o.require(dil_defect > 1e-3, "dilation shows Phi_gh != Phi_g Phi_h: " + fmt("%.6e", dil_defect));
    o.require(std::abs(dil_defect - own) <= 1e-10,
              "matches the assignment's own defect " + fmt("%.6e", own) + " (diff " + fmt("%.1e", std::abs(dil_defect - own)) + ")");
    return o;
}

Outcome one_parameter() {
    Outcome o;
    const LoadedSystem L = load_system(demo_spec("indivisible-2.4"));
    for (auto p : {Pipeline::A, Pipeline::C}) {
        const DilatedSystem ds = run_pipeline(p, L.system);
        const OneParamReport r = one_param_factorization(ds, Rational(0));
        o.details.push_back("pipeline " + to_string(p));
        require_report(o, r.report);
        o.require(r.semigroup.samples > 0 && r.semigroup.max_defect > 1e-6,
                  "semigroup-law defect of U(t) is positive: " + fmt("%.3e", r.semigroup.max_defect) + " over " +
                      std::to_string(r.semigroup.samples) + " pairs");
    }
    return o;
}

struct Criterion {
    int id;
    std::string name;
    double budget_s;
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> suite{
        {1, "confluence certification", 30, confluence},
        {2, "group laws", 5, group_laws},
        {3, "exponential perturbation bound", 10, perturbation},
        {4, "exponential derivative formula", 10, derivative},
        {5, "two-Hamiltonian time family regression", 1, regression},
        {6, "cover extension well-definedness", 20, cover_well_defined},
        {7, "continuity moduli", 60, continuity},
        {8, "dilation pipelines on all demos", 30, pipelines},
        {9, "Kraus suite", 60, kraus_suite},
        {10, "VED suite", 60, ved_suite},
        {11, "one-parameter factorization", 10, one_parameter},
    };
    int failures = 0;
    for (const auto& c : suite) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        o.require(secs < c.budget_s, "runtime " + fmt("%.2f", secs) + " s within " + fmt("%.0f", c.budget_s) + " s");
        for (const auto& d : o.details) std::cout << "    " << d << "\n";
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << " (" << fmt("%.2f", secs) << " s)\n"
                  << std::flush;
        if (!o.pass) ++failures;
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << "\n";
    return failures == 0 ? 0 : 1;
}
