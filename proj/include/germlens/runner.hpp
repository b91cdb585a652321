#pragma once

#include "germlens/config.hpp"
#include "germlens/lipschitz.hpp"
#include "germlens/puiseux.hpp"
#include "germlens/report.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>

namespace germlens {

struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> fixture;
};

inline const std::vector<std::string>& subcommands()
{
    static const std::vector<std::string> s{"dirset", "cone",      "st-fit", "st-equiv", "sandwich",  "ssp",    "ld-image",
                                            "vol",    "vol-ratio", "ctimes", "invariant", "extend", "puiseux"};
    return s;
}

/// Applies CLI overrides; the result is what the report echoes.
inline json resolve_config(json cfg, const RunOptions& o = {})
{
    if (!cfg.is_object()) throw ConfigError("", "config must be a JSON object");
    if (o.seed) cfg["seed"] = *o.seed;
    if (o.fixture) cfg["fixture"] = *o.fixture;
    if (!cfg.contains("seed")) cfg["seed"] = 0;
    if (!cfg.contains("params")) cfg["params"] = json::object();
    return cfg;
}

namespace detail {

inline std::vector<std::string> coord_header(int n, std::vector<std::string> tail = {})
{
    std::vector<std::string> h;
    for (int i = 0; i < n; ++i) h.push_back("x" + std::to_string(i + 1));
    h.insert(h.end(), tail.begin(), tail.end());
    return h;
}

inline std::vector<std::string> coord_cells(const Point& p)
{
    std::vector<std::string> r;
    for (Eigen::Index i = 0; i < p.size(); ++i) r.push_back(CsvTable::cell(p[i]));
    return r;
}

class Runner {
public:
    explicit Runner(json cfg) : cfg_(std::move(cfg)), root_(cfg_), params_(root_["params"])
    {
        root_.only({"subcommand", "fixture", "germ", "germ_b", "map", "gauge", "gauge_b", "params", "seed", "out"});
        if (!params_.is_object()) params_.fail("params must be an object");
        seed_ = root_["seed"].u64();
        if (root_.has("fixture")) {
            try {
                fix_ = fixture(root_["fixture"].string());
            } catch (const std::out_of_range& e) {
                root_["fixture"].fail(e.what());
            }
        }
        rep_.command = root_["subcommand"].string();
        rep_.config = cfg_;
    }
    Runner(const Runner&) = delete;
    Runner& operator=(const Runner&) = delete;

    Report run()
    {
        static const std::map<std::string, void (Runner::*)()> table{
            {"dirset", &Runner::dirset},     {"cone", &Runner::cone},         {"st-fit", &Runner::st_fit},
            {"st-equiv", &Runner::st_equiv}, {"sandwich", &Runner::sandwich}, {"ssp", &Runner::ssp},
            {"ld-image", &Runner::ld_image}, {"vol", &Runner::vol},           {"vol-ratio", &Runner::vol_ratio},
            {"ctimes", &Runner::ctimes},     {"invariant", &Runner::invariant}, {"extend", &Runner::extend},
            {"puiseux", &Runner::puiseux}};
        const auto it = table.find(rep_.command);
        if (it == table.end()) root_["subcommand"].fail("unknown subcommand '" + rep_.command + "'");
        (this->*(it->second))();
        return std::move(rep_);
    }

private:
    // -------------------------------------------------------------------------------------------
    // inputs

    GermSet germ_a()
    {
        if (root_.has("germ")) return germ_from_config(root_["germ"]);
        if (fix_) return fix_->germ("A");
        throw ConfigError("/germ", "required key is missing (or name a fixture)");
    }

    /// Second germ: explicit, else the fixture's other role, else nullopt.
    std::optional<GermSet> germ_b()
    {
        if (root_.has("germ_b")) return germ_from_config(root_["germ_b"]);
        if (fix_ && !root_.has("germ"))
            for (const auto& [role, g] : fix_->germs)
                if (role != "A") return g;
        return std::nullopt;
    }

    LipschitzMap map_for(int dim)
    {
        if (root_.has("map")) return map_from_config(root_["map"], dim);
        if (fix_ && fix_->map) return *fix_->map;
        throw ConfigError("/map", "required key is missing (or name a fixture with a map)");
    }

    Gauge gauge(const char* key = "gauge")
    {
        if (root_.has(key)) return gauge_from_config(root_[key]);
        return Gauge::monomial(1.0, 1.0);
    }

    Schedule schedule()
    {
        Schedule base = fix_ && fix_->schedule && !root_.has("germ") ? *fix_->schedule : Schedule{};
        return params_.has("schedule") ? schedule_from_config(params_["schedule"], base) : base;
    }

    DirectionParams dir_params()
    {
        DirectionParams p;
        p.schedule = schedule();
        p.per_shell = static_cast<int>(params_.integer_or("per_shell", p.per_shell));
        if (p.per_shell < 4) params_["per_shell"].fail("per_shell must be >= 4");
        p.eta = params_.positive_or("eta", p.eta);
        p.seed = seed_;
        return p;
    }

    STParams st_params()
    {
        STParams p;
        p.schedule = schedule();
        p.per_shell = static_cast<int>(params_.integer_or("per_shell", p.per_shell));
        p.finest = static_cast<int>(params_.integer_or("finest", p.finest));
        p.budget = params_.integer_or("budget", p.budget);
        p.max_budget = params_.integer_or("max_budget", p.max_budget);
        p.band = params_.positive_or("band", p.band);
        p.seed = seed_;
        if (p.per_shell < 1) params_["per_shell"].fail("per_shell must be >= 1");
        if (p.finest < 1 || p.finest > p.schedule.shells) params_["finest"].fail("finest must be in [1, shells]");
        if (p.budget < 1) params_["budget"].fail("budget must be >= 1");
        return p;
    }

    VolumeParams vol_params()
    {
        VolumeParams p;
        p.samples = params_.integer_or("samples", p.samples);
        p.pilot = params_.integer_or("pilot", p.pilot);
        p.importance_below = params_.positive_or("importance_below", p.importance_below);
        p.defensive = params_.positive_or("defensive", p.defensive);
        p.anchor_cap = static_cast<int>(params_.integer_or("anchor_cap", p.anchor_cap));
        p.budget = params_.integer_or("budget", p.budget);
        p.seed = seed_;
        if (p.samples < 1000) params_["samples"].fail("samples must be >= 1000");
        if (p.pilot < 100 || p.pilot > p.samples) params_["pilot"].fail("pilot must be in [100, samples]");
        if (p.defensive >= 1.0) params_["defensive"].fail("defensive share must be < 1");
        return p;
    }

    std::vector<double> eps(std::vector<double> def)
    {
        return params_.has("eps") ? eps_grid(params_["eps"]) : def;
    }

    void allow(std::initializer_list<const char*> keys) const { params_.only(keys); }

    void op(const char* name) { rep_.operations.push_back(name); }

    void set_verdict(Verdict v, std::string why = "")
    {
        rep_.verdict = v;
        if (!why.empty()) rep_.explanation.push_back(std::move(why));
    }

    bool confident(double confidence)
    {
        if (confidence >= kConfidenceGate) return true;
        set_verdict(Verdict::Abstain, "confidence " + CsvTable::cell(confidence) + " below the gate " + CsvTable::cell(kConfidenceGate));
        return false;
    }

    static CsvTable ratio_table(const RatioReport& r)
    {
        CsvTable t{"", {"eps", "ratio", "ci", "numerator", "numerator_ci", "denominator", "denominator_ci"}, {}};
        for (const auto& p : r.points) t.add(p.eps, p.ratio, p.ci, p.num.value, p.num.ci_halfwidth, p.den.value, p.den.ci_halfwidth);
        return t;
    }

    // -------------------------------------------------------------------------------------------
    // subcommands

    void dirset()
    {
        allow({"schedule", "per_shell", "eta", "expect_dim"});
        const GermSet A = germ_a();
        const auto dp = dir_params();
        op("direction_set_estimate");
        op("dimension_estimate");
        const auto D = direction_set_estimate(A, dp);
        rep_.result = {{"germ", A.name()}, {"direction_set", to_json(D)}};
        CsvTable t{"", coord_header(D.n, {"radius", "level", "cluster"}), {}};
        for (std::size_t i = 0; i < D.points.size(); ++i) {
            auto row = coord_cells(D.points[i]);
            row.push_back(CsvTable::cell(D.source_radii[i]));
            row.push_back(CsvTable::cell(D.level[i]));
            row.push_back(CsvTable::cell(D.cluster[i]));
            t.add_row(std::move(row));
        }
        rep_.tables.push_back(std::move(t));

        std::optional<long> expect;
        if (params_.has("expect_dim")) expect = params_["expect_dim"].integer();
        else if (fix_ && !root_.has("germ")) expect = fix_->truth_of("dim_D_A").value.get<long>();
        if (expect) rep_.result["expected_dim"] = *expect;
        if (!confident(D.confidence)) return;
        if (expect && D.dim != *expect)
            set_verdict(Verdict::Fail, "estimated dim " + std::to_string(D.dim) + " differs from expected " + std::to_string(*expect));
    }

    void cone()
    {
        allow({"schedule", "per_shell", "eta", "samples", "radius"});
        const GermSet A = germ_a();
        const auto dp = dir_params();
        op("direction_set_estimate");
        op("tangent_cone");
        const auto D = direction_set_estimate(A, dp);
        const GermSet LD = tangent_cone(D, "LD(" + A.name() + ")");
        const int samples = static_cast<int>(params_.integer_or("samples", 200));
        const double r = params_.positive_or("radius", dp.schedule.finest());
        const Cloud pts = LD.sample(r, samples, mix_seed(seed_, 0xC0));
        rep_.result = {{"germ", A.name()},
                       {"direction_set", to_json(D)},
                       {"cone", {{"name", LD.name()}, {"dim", D.dim < 0 ? -1 : D.dim + 1}, {"resolution", LD.resolution()},
                                 {"sample_radius", r}, {"samples", pts.size()}}}};
        CsvTable t{"", coord_header(A.dim(), {"norm"}), {}};
        for (const auto& p : pts) {
            auto row = coord_cells(p);
            row.push_back(CsvTable::cell(p.norm()));
            t.add_row(std::move(row));
        }
        rep_.tables.push_back(std::move(t));
        confident(D.confidence);
    }

    /// B for gauge fitting: explicit or fixture germ, else an estimated tangent cone.
    GermSet cone_target(const GermSet& A, const STParams& p)
    {
        if (auto B = germ_b()) return *B;
        op("direction_set_estimate");
        op("tangent_cone");
        DirectionParams dp;
        dp.schedule = p.schedule;
        dp.seed = seed_;
        return tangent_cone(direction_set_estimate(A, dp), "LD(" + A.name() + ")");
    }

    void st_fit()
    {
        allow({"schedule", "per_shell", "finest", "budget", "max_budget", "band", "certify"});
        const GermSet A = germ_a();
        const auto p = st_params();
        const GermSet B = cone_target(A, p);
        op("gauge_fit");
        const auto fit = gauge_fit(A, B, p);
        rep_.result = {{"A", A.name()}, {"B", B.name()}, {"fit", to_json(fit)}};
        CsvTable t{"", {"radius", "max_g", "samples", "used", "residual"}, {}};
        for (const auto& s : fit.shells) t.add(s.radius, s.max_g, s.samples, s.used, s.residual);
        rep_.tables.push_back(std::move(t));
        switch (fit.status) {
        case FitStatus::Empty: set_verdict(Verdict::Abstain, "no shell carried usable samples"); return;
        case FitStatus::NoMonomialGauge:
            set_verdict(Verdict::Fail, "log-log slope " + CsvTable::cell(fit.slope) + " is below " + CsvTable::cell(kMinDecaySlope) +
                                           ": no monomial gauge");
            return;
        case FitStatus::ZeroDistance: set_verdict(Verdict::Pass, "A lies in B up to resolution"); return;
        case FitStatus::Fit: break;
        }
        if (!params_.boolean_or("certify", true)) return;
        op("st_inclusion_test");
        const auto v = st_inclusion_test(A, B, *fit.gauge, p);
        rep_.result["certification"] = to_json(v);
        if (v.relation == STRelation::Abstain) set_verdict(Verdict::Abstain, "certification abstained");
        else if (v.relation != STRelation::Included)
            set_verdict(Verdict::Fail, std::to_string(v.counterexamples.size()) + " counterexamples to the fitted gauge");
    }

    void st_equiv()
    {
        allow({"schedule", "per_shell", "finest", "budget", "max_budget", "band"});
        const GermSet A = germ_a();
        const auto p = st_params();
        const GermSet B = cone_target(A, p);
        op("st_equivalence_search");
        const auto v = st_equivalence_search(A, B, p);
        rep_.result = {{"A", A.name()}, {"B", B.name()}, {"verdict", to_json(v)}};
        CsvTable t{"", coord_header(A.dim(), {"ratio", "radius"}), {}};
        for (const auto& c : v.counterexamples) {
            auto row = coord_cells(c.x);
            row.push_back(CsvTable::cell(c.ratio));
            row.push_back(CsvTable::cell(c.radius));
            t.add_row(std::move(row));
        }
        rep_.tables.push_back(std::move(t));
        if (v.relation == STRelation::Equivalent) set_verdict(Verdict::Pass);
        else if (v.relation == STRelation::NotEquivalent) set_verdict(Verdict::Fail, "counterexamples in direction " + v.failed_direction);
        else set_verdict(Verdict::Abstain, "too many indeterminate samples");
    }

    void sandwich()
    {
        allow({"schedule", "per_shell", "finest", "budget", "max_budget", "band", "count"});
        const GermSet A = germ_a();
        const LipschitzMap h = map_for(A.dim());
        if (!h.bi_lipschitz()) (root_.has("map") ? root_["map"] : root_).fail("map '" + h.name + "' has no bi-Lipschitz constants");
        const Gauge theta = gauge();
        const auto p = st_params();
        const int count = static_cast<int>(params_.integer_or("count", 2000));
        op("sandwich_gauges");
        op("sandwich_check");
        const auto s = sandwich_check(A, h, theta, count, p);
        rep_.result = {{"A", A.name()},          {"map", h.name},           {"K1", *h.K1},
                       {"K2", *h.K2},            {"theta", gauge_json(theta)}, {"theta1", gauge_json(s.theta1)},
                       {"theta2", gauge_json(s.theta2)}, {"attempted", s.attempted}, {"decided", s.decided},
                       {"passed", s.passed},     {"indeterminate", s.indeterminate}, {"failures", s.failures.size()}};
        CsvTable t{"", coord_header(A.dim()), {}};
        for (const auto& x : s.failures) t.add_row(coord_cells(x));
        rep_.tables.push_back(std::move(t));
        if (s.decided == 0) set_verdict(Verdict::Abstain, "no sample was decided");
        else if (s.passed < s.decided) set_verdict(Verdict::Fail, std::to_string(s.decided - s.passed) + " decided samples left ST_theta1(h(A))");
    }

    void ssp()
    {
        allow({"schedule", "per_shell", "eta", "eps", "finest", "rays", "random_per_ray", "wssp_fraction", "budget"});
        const GermSet A = germ_a();
        const auto dp = dir_params();
        SSPConfig c;
        c.schedule = dp.schedule;
        c.eps = eps(c.eps);
        c.finest = static_cast<int>(params_.integer_or("finest", c.finest));
        c.rays = static_cast<int>(params_.integer_or("rays", c.rays));
        c.random_per_ray = static_cast<int>(params_.integer_or("random_per_ray", c.random_per_ray));
        c.wssp_fraction = params_.positive_or("wssp_fraction", c.wssp_fraction);
        c.budget = params_.integer_or("budget", c.budget);
        c.seed = seed_;
        try {
            validate(c);
        } catch (const std::invalid_argument& e) {
            params_.fail(e.what());
        }
        op("direction_set_estimate");
        op("ssp_probe");
        op("wssp_probe");
        const auto D = direction_set_estimate(A, dp);
        const auto r = ssp_probe(A, D, c);
        rep_.result = {{"germ", A.name()}, {"direction_set", to_json(D)}, {"report", to_json(r)},
                       {"agree", r.verdict == r.wssp_verdict}};
        CsvTable t{"", {"eps", "delta", "probes", "failures", "pass_rate", "worst_gap"}, {}};
        for (const auto& cell : r.cells)
            t.add(cell.eps, cell.delta, cell.probes, cell.failures,
                  cell.probes ? 1.0 - static_cast<double>(cell.failures) / static_cast<double>(cell.probes) : 1.0, cell.worst_gap);
        rep_.tables.push_back(std::move(t));
        CsvTable rays{"rays", {"eps", "ray", "successes", "shells", "pass"}, {}};
        for (const auto& x : r.rays) rays.add(x.eps, x.ray, x.successes, x.shells, x.pass);
        rep_.tables.push_back(std::move(rays));
        if (r.verdict == "pass") set_verdict(Verdict::Pass);
        else if (r.verdict == "fail") set_verdict(Verdict::Fail, std::to_string(r.counterexamples.size()) + " probes found no shadowing point");
        else set_verdict(Verdict::Abstain, r.notes.empty() ? "abstained" : r.notes.front());
    }

    void ld_image()
    {
        allow({"schedule", "per_shell", "eta"});
        const GermSet A = germ_a();
        const LipschitzMap h = map_for(A.dim());
        const auto dp = dir_params();
        op("direction_set_estimate");
        op("tangent_cone");
        op("ld_image_check");
        const auto r = ld_image_check(h, A, dp);
        rep_.result = {{"germ", A.name()}, {"map", h.name}, {"report", to_json(r)}};
        CsvTable t{"", {"gap", "eta", "dim_hA", "dim_hLD", "pass"}, {}};
        t.add(r.gap, r.eta, r.dim_hA, r.dim_hLD, r.pass);
        rep_.tables.push_back(std::move(t));
        if (r.unstable) set_verdict(Verdict::Abstain, "a direction estimate was unstable");
        else if (!r.pass) set_verdict(Verdict::Fail, "Hausdorff gap " + CsvTable::cell(r.gap) + " exceeds eta");
    }

    void vol()
    {
        allow({"eps", "samples", "pilot", "importance_below", "defensive", "anchor_cap", "budget"});
        const GermSet A = germ_a();
        const Gauge theta = gauge();
        const auto vp = vol_params();
        op("vol_st_ball");
        json est = json::array();
        CsvTable t{"", {"eps", "value", "ci_halfwidth", "n_samples", "estimator", "indeterminate_fraction"}, {}};
        bool murky = false;
        for (double e : eps({1e-1, 1e-2})) {
            const auto v = vol_st_ball(A, theta, e, vp);
            est.push_back(to_json(v));
            t.add(v.eps, v.value, v.ci_halfwidth, v.n_samples, v.estimator, v.indeterminate_fraction);
            murky = murky || v.indeterminate_fraction > 0.1;
        }
        rep_.result = {{"germ", A.name()}, {"theta", gauge_json(theta)}, {"estimates", est}};
        rep_.tables.push_back(std::move(t));
        if (murky) set_verdict(Verdict::Abstain, "more than 10% of samples were indeterminate");
    }

    void ratio_verdict(const RatioReport& r, std::optional<std::string> expect)
    {
        if (r.verdict == RatioVerdict::Inconclusive || r.verdict == RatioVerdict::Degenerate) {
            set_verdict(Verdict::Abstain, std::string("ratio curve is ") + to_string(r.verdict));
            return;
        }
        if (expect && *expect != to_string(r.verdict))
            set_verdict(Verdict::Fail, std::string("verdict ") + to_string(r.verdict) + " differs from expected " + *expect);
    }

    void vol_ratio()
    {
        allow({"eps", "samples", "pilot", "importance_below", "defensive", "anchor_cap", "budget", "expect"});
        const GermSet A = germ_a();
        const auto B = germ_b();
        if (!B) throw ConfigError("/germ_b", "required key is missing");
        const Gauge ta = gauge(), tb = root_.has("gauge_b") ? gauge("gauge_b") : ta;
        const auto vp = vol_params();
        std::optional<std::string> expect;
        if (params_.has("expect")) {
            expect = params_["expect"].string();
            static const std::set<std::string> ok{"decays-to-zero", "comparable", "increases"};
            if (!ok.count(*expect)) params_["expect"].fail("expect must be decays-to-zero, comparable or increases");
        }
        op("vol_st_ball");
        op("ratio_curve");
        const auto r = ratio_curve(A, ta, *B, tb, eps(default_eps_schedule()), vp);
        rep_.result = {{"A", A.name()}, {"B", B->name()}, {"theta_a", gauge_json(ta)}, {"theta_b", gauge_json(tb)}, {"report", to_json(r)}};
        rep_.tables.push_back(ratio_table(r));
        ratio_verdict(r, expect);
    }

    void ctimes()
    {
        allow({"eps", "samples", "pilot", "importance_below", "defensive", "anchor_cap", "budget", "c"});
        const GermSet A = germ_a();
        const Gauge theta = gauge();
        const double c = params_.positive_or("c", 2.0);
        const auto vp = vol_params();
        op("vol_st_ball");
        op("ctimes_check");
        const auto r = ctimes_check(A, theta, c, eps(default_eps_schedule()), vp);
        rep_.result = {{"germ", A.name()}, {"theta", gauge_json(theta)}, {"c", c}, {"report", to_json(r)}};
        rep_.tables.push_back(ratio_table(r));
        ratio_verdict(r, std::string("comparable"));
    }

    void invariant()
    {
        allow({"schedule", "per_shell", "eta"});
        const GermSet A = germ_a();
        const GermSet B = root_.has("germ_b") ? germ_from_config(root_["germ_b"]) : A;
        const LipschitzMap h = map_for(A.dim());
        const auto dp = dir_params();
        json flags;
        const bool fixture_map = fix_ && !root_.has("map");
        if (fixture_map)
            flags = {{"definable", fix_->flags.definable}, {"bi_lipschitz", fix_->flags.bi_lipschitz},
                     {"image_definable", fix_->flags.image_definable}, {"source", "fixture"}};
        else
            flags = {{"definable", nullptr}, {"bi_lipschitz", h.bi_lipschitz()}, {"image_definable", nullptr}, {"source", "map"}};
        op("direction_intersection_dim");
        op("invariant_check");
        const auto r = invariant_check(h, A, B, dp);
        rep_.result = {{"A", A.name()}, {"B", B.name()}, {"map", h.name}, {"hypothesis_flags", flags}, {"report", to_json(r)}};
        CsvTable t{"", {"stage", "dim", "dim_A", "dim_B", "confidence", "unstable"}, {}};
        t.add("before", r.before.dim, r.before.dim_A, r.before.dim_B, r.before.confidence, r.before.unstable);
        t.add("after", r.after.dim, r.after.dim_A, r.after.dim_B, r.after.confidence, r.after.unstable);
        rep_.tables.push_back(std::move(t));
        if (fix_ && fix_->invariant_excluded && !root_.has("germ")) {
            set_verdict(Verdict::Abstain, "fixture '" + fix_->name + "' is excluded from invariant assertions: " + fix_->note);
            return;
        }
        if (!confident(r.confidence)) return;
        if (r.equal) return;
        set_verdict(Verdict::Fail, "directional dimension changes from " + std::to_string(r.dim_before) + " to " + std::to_string(r.dim_after));
        bool named = false;
        for (const auto& [key, what] : {std::pair{"definable", "the germs are not definable"},
                                        std::pair{"bi_lipschitz", "the map is not bi-Lipschitz"},
                                        std::pair{"image_definable", "the image is not definable"}})
            if (flags[key].is_boolean() && !flags[key].get<bool>()) {
                rep_.explanation.push_back("hypothesis violated: " + std::string(what));
                named = true;
            }
        if (!named) rep_.explanation.push_back("no hypothesis violation is recorded for these inputs");
    }

    void extend()
    {
        allow({"f", "L", "schedule", "per_shell", "grid", "pairs"});
        const GermSet A = germ_a();
        const int n = A.dim();
        const Expr f = expr_at(params_["f"]);
        probe_expr(params_["f"], f, coord_env(Point::Constant(n, 0.1)));
        const double L = params_["L"].positive();
        const Schedule s = schedule();
        const int per_shell = static_cast<int>(params_.integer_or("per_shell", 20));
        const long pairs = params_.integer_or("pairs", 10000);
        Point lo = Point::Constant(n, -s.r0), hi = Point::Constant(n, s.r0);
        long steps = 11;
        if (params_.has("grid")) {
            const Node g = params_["grid"];
            g.only({"lo", "hi", "steps"});
            if (g.has("lo")) lo = g["lo"].point();
            if (g.has("hi")) hi = g["hi"].point();
            steps = g.integer_or("steps", steps);
            if (lo.size() != n || hi.size() != n) g.fail("grid corners must have dimension " + std::to_string(n));
            if (steps < 2 || std::pow(static_cast<double>(steps), n) > 1e6) g["steps"].fail("steps must be >= 2 with at most 1e6 grid points");
        }
        auto fn = [&f](const Point& x) { return f.eval(coord_env(x)); };
        op("banach_extension");
        std::optional<BanachExtension> ext;
        try {
            ext.emplace(banach_extension(A, fn, L, s, per_shell, seed_));
        } catch (const LipschitzViolation& v) {
            rep_.result = {{"germ", A.name()}, {"L", L}, {"violation", {{"a", point_json(v.a)}, {"b", point_json(v.b)}, {"quotient", v.quotient}}}};
            set_verdict(Verdict::Fail, v.what());
            return;
        }
        double restriction = 0.0;
        for (std::size_t i = 0; i < ext->anchors().size(); ++i) {
            restriction = std::max(restriction, std::fabs(ext->alpha(ext->anchors()[i]) - ext->values()[i]));
            restriction = std::max(restriction, std::fabs(ext->beta(ext->anchors()[i]) - ext->values()[i]));
        }
        Cloud grid;
        const long total = static_cast<long>(std::pow(static_cast<double>(steps), n));
        for (long k = 0; k < total; ++k) {
            Point x(n);
            long r = k;
            for (int i = 0; i < n; ++i) {
                x[i] = lo[i] + (hi[i] - lo[i]) * static_cast<double>(r % steps) / static_cast<double>(steps - 1);
                r /= steps;
            }
            grid.push_back(x);
        }
        CsvTable t{"", coord_header(n, {"alpha", "beta"}), {}};
        std::size_t order_violations = 0;
        for (const auto& x : grid) {
            const double a = ext->alpha(x), b = ext->beta(x);
            if (b > a + 1e-12) ++order_violations;
            auto row = coord_cells(x);
            row.push_back(CsvTable::cell(a));
            row.push_back(CsvTable::cell(b));
            t.add_row(std::move(row));
        }
        rep_.tables.push_back(std::move(t));
        Rng rng = make_rng(seed_, 0xE7);
        double worst = 0.0;
        std::size_t quotient_violations = 0;
        for (long k = 0; k < pairs; ++k) {
            const Point& x = grid[rng() % grid.size()];
            const Point y = x + random_in_ball(rng, n, (hi - lo).norm() * 0.25);
            const double d = (x - y).norm();
            if (d == 0.0) continue;
            for (const double q : {std::fabs(ext->alpha(x) - ext->alpha(y)) / d, std::fabs(ext->beta(x) - ext->beta(y)) / d}) {
                worst = std::max(worst, q);
                if (q > L * (1 + 1e-6)) ++quotient_violations;
            }
        }
        rep_.result = {{"germ", A.name()},
                       {"L", L},
                       {"anchors", ext->anchors().size()},
                       {"restriction_error", restriction},
                       {"grid_points", grid.size()},
                       {"beta_above_alpha", order_violations},
                       {"pairs", pairs},
                       {"max_quotient", worst},
                       {"quotient_violations", quotient_violations}};
        if (restriction > 1e-12) set_verdict(Verdict::Fail, "extension does not restrict to f on the anchors");
        else if (order_violations || quotient_violations) set_verdict(Verdict::Fail, "Lipschitz or ordering violations found");
    }

    void puiseux()
    {
        allow({"trunc", "evaluate", "cells", "scaling", "packing", "dist"});
        Rational T = kDefaultTruncOrder;
        if (params_.has("trunc")) {
            try {
                T = Rational(params_["trunc"].string());
            } catch (const std::exception&) {
                params_["trunc"].fail("expected a rational such as \"8\" or \"17/2\"");
            }
            if (T <= 0) params_["trunc"].fail("truncation order must be positive");
        }
        json demo;
        const bool use_demo = !params_.has("evaluate") && !params_.has("cells") && !params_.has("scaling") &&
                              !params_.has("packing") && !params_.has("dist");
        if (use_demo) {
            demo = json::parse(R"({
                "evaluate": [{"op": "inv", "args": ["1 - t"]}, {"op": "compare", "args": ["t", "1/1000000"]},
                             {"op": "norm", "args": ["t", "t^2"]}],
                "cells": [{"a1": "0", "psi": "x", "b1": "1", "phi": "t + x"}, {"a1": "0", "psi": "0", "b1": "1", "phi": "x"}],
                "scaling": [{"cell": {"a1": "0", "psi": "x", "b1": "1", "phi": "t + x"}, "c": "2"}],
                "packing": [{"cell": {"a1": "0", "psi": "0", "b1": "1", "phi": "x"}, "k": 64}],
                "dist": [{"A": [["0", "0"], ["1", "0"]], "B": [["1 + t", "0"]]}]
            })");
            rep_.result["demo"] = true;
        }
        const Node P = use_demo ? Node(demo, "/params(demo)") : params_;
        auto lit = [&T](const Node& n) {
            try {
                return px_parse(n.string(), T);
            } catch (const std::invalid_argument& e) {
                n.fail(e.what());
            }
        };
        auto poly = [&T](const Node& n) {
            try {
                return poly_parse(n.string(), T);
            } catch (const std::invalid_argument& e) {
                n.fail(e.what());
            }
        };
        auto cell = [&](const Node& n) {
            n.only({"a1", "psi", "b1", "phi"});
            return CellForm2D{lit(n["a1"]), lit(n["b1"]), poly(n["psi"]), poly(n["phi"])};
        };
        auto vec = [&](const Node& n) {
            if (!n.is_array() || n.size() == 0) n.fail("expected a nonempty vector of literals");
            PxVector v;
            for (std::size_t i = 0; i < n.size(); ++i) v.push_back(lit(n[i]));
            return v;
        };
        CsvTable t{"", {"kind", "input", "output", "status"}, {}};
        bool failed = false, murky = false;
        json items = json::array();
        auto record = [&](const std::string& kind, const std::string& in, const std::string& out, const std::string& status, json extra) {
            t.add(kind, in, out, status);
            extra["kind"] = kind;
            extra["input"] = in;
            extra["output"] = out;
            extra["status"] = status;
            items.push_back(std::move(extra));
            failed = failed || status == "fail" || status == "error";
            murky = murky || status == "indeterminate";
        };
        auto status_of = [](const PuiseuxNumber& x) { return x.truncation_loss() ? std::string("truncation-loss") : std::string("ok"); };

        if (P.has("evaluate")) {
            op("px_arithmetic");
            const Node E = P["evaluate"];
            if (!E.is_array()) E.fail("expected a list of operations");
            for (std::size_t i = 0; i < E.size(); ++i) {
                const Node item = E[i];
                item.only({"op", "args"});
                const std::string o = item["op"].string();
                const Node args = item["args"];
                if (!args.is_array()) args.fail("expected a list of literals");
                std::vector<PuiseuxNumber> a;
                std::string in;
                for (std::size_t k = 0; k < args.size(); ++k) {
                    a.push_back(lit(args[k]));
                    in += (k ? " ; " : "") + args[k].string();
                }
                static const std::map<std::string, std::size_t> arity{{"add", 2}, {"sub", 2}, {"mul", 2}, {"div", 2}, {"inv", 1},
                                                                       {"neg", 1}, {"compare", 2}, {"norm", 0}};
                const auto ar = arity.find(o);
                if (ar == arity.end()) item["op"].fail("unknown op '" + o + "'");
                if ((ar->second && a.size() != ar->second) || a.empty()) args.fail("wrong number of arguments for " + o);
                try {
                    if (o == "compare") {
                        const auto c = px_compare(a[0], a[1]);
                        record(o, in, to_string(c), c == PxOrder::Indeterminate ? "indeterminate" : "ok", json::object());
                        continue;
                    }
                    PuiseuxNumber r;
                    std::string status = "ok";
                    if (o == "add") r = a[0] + a[1];
                    else if (o == "sub") r = a[0] - a[1];
                    else if (o == "mul") r = a[0] * a[1];
                    else if (o == "div") r = a[0] / a[1];
                    else if (o == "inv") r = px_inv(a[0]);
                    else if (o == "neg") r = -a[0];
                    else {
                        const auto m = px_norm(a);
                        r = m.value;
                        if (m.indeterminate) status = "indeterminate";
                    }
                    if (status == "ok") status = status_of(r);
                    record(o, in, to_string(r), status, {{"value", to_json(r)}});
                } catch (const std::domain_error& e) {
                    record(o, in, e.what(), "error", json::object());
                }
            }
        }
        if (P.has("dist")) {
            op("px_dist_set");
            const Node D = P["dist"];
            if (!D.is_array()) D.fail("expected a list of {A, B} pairs");
            for (std::size_t i = 0; i < D.size(); ++i) {
                D[i].only({"A", "B"});
                auto set = [&](const Node& n) {
                    if (!n.is_array() || n.size() == 0) n.fail("expected a nonempty list of vectors");
                    std::vector<PxVector> s;
                    for (std::size_t k = 0; k < n.size(); ++k) s.push_back(vec(n[k]));
                    for (const auto& v : s)
                        if (v.size() != s.front().size()) n.fail("vectors must share a dimension");
                    return s;
                };
                const auto A = set(D[i]["A"]), B = set(D[i]["B"]);
                if (A.front().size() != B.front().size()) D[i].fail("A and B live in different dimensions");
                const auto d = px_dist_set(A, B);
                record("dist", D[i].raw().dump(), "[0, " + to_string(d.right_end) + "]", d.indeterminate ? "indeterminate" : "ok",
                       {{"interval", to_json(d)}});
            }
        }
        if (P.has("cells")) {
            op("px_vol_cell");
            const Node C = P["cells"];
            if (!C.is_array()) C.fail("expected a list of cells");
            for (std::size_t i = 0; i < C.size(); ++i) {
                const auto c = cell(C[i]);
                try {
                    const auto v = px_vol_cell(c);
                    record("vol", to_json(c).dump(), "[0, " + to_string(v.right_end) + "]", status_of(v.right_end), {{"interval", to_json(v)}});
                } catch (const std::invalid_argument& e) {
                    C[i].fail(e.what());
                }
            }
        }
        if (P.has("scaling")) {
            op("px_vol_scaling_check");
            const Node S = P["scaling"];
            if (!S.is_array()) S.fail("expected a list of {cell, c}");
            for (std::size_t i = 0; i < S.size(); ++i) {
                S[i].only({"cell", "c"});
                const auto c = cell(S[i]["cell"]);
                Rational k;
                try {
                    k = Rational(S[i]["c"].string());
                } catch (const std::exception&) {
                    S[i]["c"].fail("expected a rational such as \"2\" or \"3/2\"");
                }
                try {
                    const auto r = px_vol_scaling_check(c, k);
                    record("scaling", to_json(c).dump() + " c=" + k.str(), to_string(r.vol_w) + " -> " + to_string(r.vol_cw),
                           r.ratio_exact ? "ok" : "fail", {{"report", to_json(r)}});
                } catch (const std::invalid_argument& e) {
                    S[i].fail(e.what());
                }
            }
        }
        if (P.has("packing")) {
            op("px_vol_cell");
            op("cube_packing");
            const Node K = P["packing"];
            if (!K.is_array()) K.fail("expected a list of {cell, k}");
            for (std::size_t i = 0; i < K.size(); ++i) {
                K[i].only({"cell", "k"});
                const auto c = cell(K[i]["cell"]);
                const long k = K[i]["k"].integer();
                if (k < 1 || k > 100000) K[i]["k"].fail("k must be in [1, 100000]");
                Packing pk;
                PuiseuxNumber v;
                try {
                    pk = cube_packing(c, static_cast<std::size_t>(k));
                    v = px_vol_cell(c).right_end;
                } catch (const std::exception& e) {
                    K[i].fail(e.what());
                }
                const Rational vol = v.rational_value();
                // exactness is the dominance area <= vol; the 1/k closeness is reported, not enforced
                const bool ok = pk.area <= vol;
                record("packing", to_json(c).dump() + " k=" + std::to_string(k), pk.area.str() + " <= " + vol.str(), ok ? "ok" : "fail",
                       {{"packing", to_json(pk)},
                        {"volume", vol.str()},
                        {"gap", static_cast<double>(vol - pk.area)},
                        {"within_1_over_k", vol - pk.area <= Rational(1, k)}});
            }
        }
        rep_.result["items"] = items;
        rep_.result["trunc_order"] = T.str();
        rep_.tables.push_back(std::move(t));
        if (failed) set_verdict(Verdict::Fail, "an exactness check failed");
        else if (murky) set_verdict(Verdict::Abstain, "a comparison was indeterminate at the truncation order");
    }

    json cfg_;
    Node root_;
    Node params_;
    std::uint64_t seed_ = 0;
    std::optional<Fixture> fix_;
    Report rep_;
};

}  // namespace detail

/// Runs one experiment; throws ConfigError on schema problems.
inline Report run(const json& config, const RunOptions& o = {})
{
    return detail::Runner(resolve_config(config, o)).run();
}

}  // namespace germlens
