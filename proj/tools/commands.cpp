#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "fresnel/decay.hpp"
#include "fresnel/errors.hpp"
#include "fresnel/parallel.hpp"
#include "fresnel/surface.hpp"

namespace cli {

using namespace fresnel;
namespace fs = std::filesystem;

namespace {

constexpr double kDeg = M_PI / 180.0;

json vec_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

json fit_json(const DecayFit& f) {
    return {{"exponent", f.exponent}, {"constant", f.constant}, {"residual", f.residual},
            {"t_min", f.t_min},       {"t_max", f.t_max},       {"samples", f.samples}};
}

json prediction_json(const RatePrediction& p) {
    return {{"convex", p.convex},       {"inconclusive", p.inconclusive}, {"order", p.order},
            {"exponent", p.exponent},   {"regularity", p.regularity},     {"branch", p.branch}};
}

SurfaceSampling sampling_of(const Scenario& sc) {
    SurfaceSampling s;
    if (sc.surface) {
        s.resolution_deg = sc.surface->resolution_deg;
        s.refine_inflections = sc.surface->refine_inflections;
        s.omega_count = sc.surface->omega_count;
    }
    return s;
}

ContactReport contact_of(const Scenario& sc, const PhaseSpec& phase) {
    const SurfaceBlock b = sc.surface.value_or(SurfaceBlock{});
    return global_indices(phase, sampling_of(sc), b.gamma_max, b.tol);
}

// Series with the fitted line appended as a third column.
Series decay_series(const std::string& name, const std::string& x, const DecaySeries& s, const DecayFit* fit) {
    Series out{name, {x, "sup"}, {}};
    if (fit) out.columns.push_back("fit");
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        std::vector<double> row{s.t[i], s.s[i]};
        if (fit) row.push_back(std::exp(fit->constant) * std::pow(s.t[i], fit->exponent));
        out.rows.push_back(row);
    }
    return out;
}

SurfaceDensity density_of(const PhaseSpec& phase) {
    SurfaceDensity d;
    d.phase = phase;
    return d;
}

Vec planar(int n, double angle, double r) {
    Vec x = Vec::Zero(n);
    x[0] = r * std::cos(angle);
    x[1] = r * std::sin(angle);
    return x;
}

std::vector<Vec> x_grid(int n, double lo, double hi, int count) {
    std::vector<Vec> out;
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    auto coord = [&](int i) { return count == 1 ? lo : lo + (hi - lo) * i / (count - 1); };
    while (true) {
        Vec x(n);
        for (int d = 0; d < n; ++d) x[d] = coord(idx[static_cast<std::size_t>(d)]);
        out.push_back(x);
        int d = n - 1;
        while (d >= 0 && ++idx[static_cast<std::size_t>(d)] == count) idx[static_cast<std::size_t>(d--)] = 0;
        if (d < 0) break;
    }
    return out;
}

std::vector<std::pair<std::string, TimeFunction>> coefficients(const ModelBlock& m) {
    std::vector<std::pair<std::string, TimeFunction>> out;
    if (m.kind == "wave") {
        if (m.isotropic) {
            out.emplace_back("a", m.a.build());
        } else {
            for (std::size_t i = 0; i < m.matrix.size(); ++i)
                for (std::size_t j = i; j < m.matrix.size(); ++j)
                    out.emplace_back("a" + std::to_string(i + 1) + std::to_string(j + 1), m.matrix[i][j].build());
        }
    } else if (m.kind == "higher-order") {
        for (std::size_t i = 0; i < m.terms.size(); ++i) out.emplace_back("terms/" + std::to_string(i), m.terms[i].coefficient.build());
    }
    return out;
}

std::string csv_number(double v) {
    if (!std::isfinite(v)) return "nan";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write " + path.string());
    f << text;
}

std::string header_comment(const Scenario& sc, const OutputContext& ctx) {
    return "# fresnel " FRESNEL_VERSION " schema " + std::to_string(kSchemaVersion) + " scenario " + sc.id + " sha256 " +
           ctx.sha256 + "\n";
}

}  // namespace

// ---------------------------------------------------------------------------

Analysis analyze_surface(const Scenario& sc) {
    const PhaseSpec phase = sc.build_phase();
    const ContactReport r = contact_of(sc, phase);
    Analysis a;
    a.result = {{"gamma", r.gamma},
                {"gamma0", r.gamma0},
                {"kappa", r.kappa},
                {"kappa0", r.kappa0},
                {"convex", r.convex},
                {"min_curvature", r.min_curvature},
                {"inconclusive", r.inconclusive},
                {"dimension", r.dimension},
                {"gamma_max", r.gamma_max},
                {"tol", r.tol},
                {"resolution_deg", r.resolution_deg},
                {"point_count", r.point_count},
                {"direction_count", r.direction_count},
                {"curvature_sign_changes", r.curvature_sign_changes},
                {"prediction", prediction_json(predict_rate(r, r.dimension))}};
    json worst = json::array();
    for (const auto& w : r.worst)
        worst.push_back({{"point", vec_json(w.point)}, {"omega", vec_json(w.omega)}, {"order", w.order}, {"reason", w.reason}});
    a.result["worst"] = worst;

    Series pts{"points", {}, {}};
    for (int d = 0; d < r.dimension; ++d) pts.columns.push_back("theta" + std::to_string(d + 1));
    for (const char* c : {"gamma_sup", "gamma_inf", "kappa", "kappa0", "min_curvature"}) pts.columns.emplace_back(c);
    for (const auto& p : r.points) {
        std::vector<double> row(p.direction.data(), p.direction.data() + p.direction.size());
        row.insert(row.end(), {double(p.gamma_sup), double(p.gamma_inf), p.kappa, p.kappa0, p.min_curvature});
        pts.rows.push_back(row);
    }
    a.series.push_back(pts);
    return a;
}

Analysis ft_surface(const Scenario& sc) {
    const FtBlock b = *sc.ft;
    const PhaseSpec phase = sc.build_phase();
    const int n = phase.dimension();
    SurfaceTransform tr(density_of(phase), b.abs_tol);
    Analysis a;
    auto along = [&](double angle) {
        return [&tr, n, angle](double r) { return std::abs(tr(planar(n, angle, r))); };
    };

    double angle = b.direction_deg.value_or(0.0) * kDeg;
    if (!b.direction_deg) {
        json scan = json::array();
        double worst = -1.0;
        const int steps = static_cast<int>(std::floor((b.scan_to_deg - b.scan_from_deg) / b.scan_step_deg + 1e-9));
        for (int k = 0; k <= steps; ++k) {
            const double deg = b.scan_from_deg + k * b.scan_step_deg;
            const double env = envelope_sup(along(deg * kDeg), b.scan_radius, b.window, b.step);
            scan.push_back({{"angle_deg", deg}, {"envelope", env}});
            if (env > worst) worst = env, angle = deg * kDeg;
        }
        a.result["scan"] = scan;
    }
    a.result["direction_deg"] = angle / kDeg;

    DecaySeries s;
    s.scenario = sc.id;
    for (double r0 : log_space(b.r_min, b.r_max, b.count)) s.add(r0, envelope_sup(along(angle), r0, b.window, b.step));
    const DecayFit fit = fit_decay(s);
    a.result["fit"] = fit_json(fit);
    a.result["prediction"] = prediction_json(predict_rate(contact_of(sc, phase), n));
    a.series.push_back(decay_series("envelope", "r", s, &fit));

    if (!b.reference.empty()) {
        std::vector<Vec> xs;
        for (int i = 0; i < b.reference_count; ++i) {
            const double r = b.reference_r_max * i / (b.reference_count - 1);
            Vec x = Vec::Zero(n);
            // Directions cycle through the sphere so the check is not one-dimensional.
            const double u = 0.37 * i, v = 0.23 * i;
            if (n == 2) {
                x << std::cos(u), std::sin(u);
            } else {
                x << std::sin(v) * std::cos(u), std::sin(v) * std::sin(u), std::cos(v);
            }
            xs.push_back(r * x);
        }
        const auto vals = tr.evaluate(xs);
        double err = 0.0;
        Series cmp{"reference", {"r", "re", "im", "exact"}, {}};
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double r = xs[i].norm();
            const double exact = n == 2 ? 2 * M_PI * std::cyl_bessel_j(0.0, r) : (r == 0.0 ? 4 * M_PI : 4 * M_PI * std::sin(r) / r);
            err = std::max(err, std::abs(vals[i] - cplx(exact, 0.0)));
            cmp.rows.push_back({r, vals[i].real(), vals[i].imag(), exact});
        }
        a.result["reference"] = {{"kind", b.reference}, {"r_max", b.reference_r_max}, {"max_error", err}};
        a.series.push_back(cmp);
    }
    return a;
}

Analysis fio_decay(const Scenario& sc) {
    const FioBlock b = *sc.fio;
    const PhaseSpec phase = sc.build_phase();
    RadialFio fio(phase, sc.build_amplitude(), b.annulus.profile(), b.rel_tol);
    DecaySeries s;
    s.scenario = sc.id;
    s.ray = std::to_string(b.rays) + " rays x " + std::to_string(b.per_ray) + " points";
    for (double t : log_space(b.t_min, b.t_max, b.count)) {
        const auto pts = ray_points(b.radius_factor * t * fio.speed_max(), b.rays, b.per_ray, b.ray_offset_deg * kDeg);
        std::vector<double> vals(pts.size());
        parallel_for(pts.size(), [&](std::size_t i) { vals[i] = std::abs(fio(t, pts[i])); });
        s.add(t, measure_sup(vals));
    }
    Analysis a;
    const DecayFit fit = fit_decay(s);
    a.result = {{"sampling", s.ray},
                {"speed_min", fio.speed_min()},
                {"speed_max", fio.speed_max()},
                {"fit", fit_json(fit)},
                {"prediction", prediction_json(predict_rate(contact_of(sc, phase), 2))}};
    a.series.push_back(decay_series("sup", "t", s, &fit));
    return a;
}

Analysis evolve_model(const Scenario& sc) {
    const EvolveBlock b = *sc.evolve;
    const EvolutionSpec spec = sc.build_model();
    const auto ts = log_space(b.t_min, b.t_max, b.count);
    EvolveOptions opts;
    opts.rel_tol = b.rel_tol;
    opts.abs_tol = b.abs_tol;
    Analysis a;
    DecaySeries s;
    s.scenario = sc.id;
    if (b.method == "radial") {
        RadialWaveEvolution ev(std::get<WaveModelSpec>(spec), b.annulus.profile(), ts, opts);
        Series out{"sup", {"t", "sup", "front"}, {}};
        for (std::size_t i = 0; i < ts.size(); ++i) {
            s.add(ts[i], ev.sup_norm(i));
            out.rows.push_back({ts[i], s.s.back(), ev.front(i)});
        }
        a.result["nodes"] = ev.node_count();
        a.series.push_back(out);
    } else {
        const int n = sc.model->n;
        const auto profile = b.annulus.profile();
        CauchyData data;
        data.fields.push_back(GriddedField::from_spectrum(n, b.extent, b.points, [&](const Vec& xi) { return cplx(profile(xi.norm()), 0.0); }));
        for (int c = 1; c < root_count(spec); ++c) data.fields.emplace_back(n, b.extent, b.points);
        const EvolutionResult r = evolve(spec, data, ts, opts);
        Series out{"sup", {"t", "sup", "l2", "energy"}, {}};
        for (std::size_t i = 0; i < ts.size(); ++i) {
            s.add(ts[i], r.sup_norms[i]);
            out.rows.push_back({ts[i], r.sup_norms[i], r.l2_norms[i], r.energies[i]});
        }
        a.result["ode_solves"] = r.ode_solves;
        double l2_0 = 0.0, drift = 0.0;
        for (const auto& f : data.fields) l2_0 = std::hypot(l2_0, f.l2_norm());
        for (double l2 : r.l2_norms) drift = std::max(drift, std::abs(l2 - l2_0) / l2_0);
        a.result["l2"] = {{"initial", l2_0}, {"final", r.l2_norms.back()}, {"max_relative_drift", drift}};
        a.series.push_back(out);
    }
    a.result["method"] = b.method;
    try {
        a.result["fit"] = fit_json(fit_decay(s));
    } catch (const FitError& e) {
        a.result["fit"] = nullptr;
        a.result["fit_note"] = e.what();
    }
    return a;
}

Analysis check_hyp(const Scenario& sc) {
    const HyperbolicityBlock b = sc.hyperbolicity.value_or(HyperbolicityBlock{});
    const EvolutionSpec spec = sc.build_model();
    const int n = sc.model->n;
    Analysis a;

    SymbolClassSpec cls;
    cls.ell = b.ell;
    cls.max_order = b.max_order;
    cls.t_grid = SymbolClassSpec::default_t_grid(b.t_max);
    json coeffs = json::array();
    for (const auto& [name, f] : coefficients(*sc.model)) {
        const auto r = check_symbol_class(f, cls);
        coeffs.push_back({{"name", name}, {"expression", f.description()}, {"member", r.member},
                          {"constants", r.constants}, {"growth", r.growth}, {"witness_t", r.witness_t}});
        if (!r.member) a.violated = true;
    }
    a.result["symbol_class"] = {{"class", "T{" + csv_number(b.ell) + "}"}, {"t_max", b.t_max}, {"coefficients", coeffs}};

    const auto dirs = direction_grid(n, b.direction_deg);
    try {
        const auto h = check_strict_hyperbolicity(spec, cls.t_grid, dirs);
        a.result["hyperbolicity"] = {{"strict", true}, {"c_gap", h.c_gap}, {"witness_t", h.witness_t}, {"witness_xi", vec_json(h.witness_xi)}};
    } catch (const DistinctnessError& e) {
        a.violated = true;
        a.result["hyperbolicity"] = {{"strict", false}, {"note", e.what()}, {"witness_t", e.witness_t()}, {"witness_xi", e.witness_xi()}};
    } catch (const HypothesisViolation& e) {
        a.violated = true;
        a.result["hyperbolicity"] = {{"strict", false}, {"note", e.what()}};
    }

    if (a.result["hyperbolicity"]["strict"].get<bool>()) {
        const auto hh = check_hh_condition(spec, b.hh_t_max, dirs);
        a.result["hh"] = {{"sup", hh.sup}, {"t_max", b.hh_t_max}, {"witness_t", hh.witness_t},
                          {"witness_root", hh.witness_root}, {"witness_direction", vec_json(hh.witness_direction)}};
        json geo = json::array();
        for (double t : b.geometry_times) {
            const auto r = global_indices(fresnel_phase_at(spec, t), sampling_of(sc));
            geo.push_back({{"t", t}, {"gamma", r.gamma}, {"gamma0", r.gamma0}, {"convex", r.convex},
                           {"kappa", r.kappa}, {"kappa0", r.kappa0}});
        }
        a.result["geometry"] = geo;
    }
    return a;
}

Analysis check_l2(const Scenario& sc) {
    const L2Block b = *sc.l2;
    const PhaseSpec phase = sc.build_phase();
    const int n = phase.dimension();
    Analysis a;
    const auto r = check_l2_conditions(phase, b.t_grid, x_grid(n, b.x_min, b.x_max, b.x_count), direction_grid(n, b.direction_deg),
                                       b.threshold);
    a.violated = r.violated;
    a.result["determinant"] = {{"c0", r.c0},
                               {"violated", r.violated},
                               {"sign_change", r.sign_change},
                               {"threshold", r.threshold},
                               {"witness_t", r.witness_t},
                               {"witness_x", vec_json(r.witness_x)},
                               {"witness_xi", vec_json(r.witness_xi)},
                               {"bounds", r.bounds},
                               {"note", r.note}};
    if (b.uniformity) {
        const UniformityBlock& u = *b.uniformity;
        std::vector<GriddedField> tests;
        for (int i = 0; i < u.tests; ++i) tests.push_back(random_band_limited(2, u.extent, u.points, u.band, sc.seed + static_cast<std::uint64_t>(i)));
        const auto ts = log_space(u.t_min, u.t_max, u.count);
        const auto rep = check_l2_uniformity(normalized_fio(phase, sc.build_amplitude()), tests, ts);
        a.result["uniformity"] = {{"max_ratio", rep.max_ratio}, {"min_ratio", rep.min_ratio}, {"tests", u.tests}, {"times", ts}};
        Series s{"ratios", {"t"}, {}};
        for (int i = 0; i < u.tests; ++i) s.columns.push_back("f" + std::to_string(i));
        for (std::size_t k = 0; k < ts.size(); ++k) {
            std::vector<double> row{ts[k]};
            for (const auto& f : rep.ratios) row.push_back(f[k]);
            s.rows.push_back(row);
        }
        a.series.push_back(s);
    }
    return a;
}

Analysis vdc_table(const Scenario& sc) {
    const VdcBlock b = *sc.vdc;
    const auto lambdas = log_space(b.lambda_min, b.lambda_max, b.count);
    auto amp = [&b](double s) { return plateau_bump(s, b.inner, b.outer); };
    Analysis a;
    json orders = json::array();
    for (int k : b.k) {
        const auto rows = van_der_corput_1d(k, amp, {-b.outer, b.outer}, lambdas);
        double lo = INFINITY, hi = 0.0;
        Series s{"k" + std::to_string(k), {"lambda", "magnitude", "ratio"}, {}};
        for (const auto& r : rows) {
            lo = std::min(lo, r.ratio);
            hi = std::max(hi, r.ratio);
            s.rows.push_back({r.lambda, r.magnitude, r.ratio});
        }
        // Stationary point of order k at 0: |int e^{i lambda s^k}| ~ 2 Gamma(1 + 1/k) c_k lambda^(-1/k).
        const double asym = 2.0 * std::tgamma(1.0 + 1.0 / k) * (k % 2 == 0 ? 1.0 : std::cos(M_PI / (2.0 * k)));
        orders.push_back({{"k", k}, {"ratio_min", lo}, {"ratio_max", hi}, {"variation", hi / lo},
                          {"asymptotic_ratio", asym}, {"final_over_asymptotic", rows.back().ratio / asym}});
        a.series.push_back(s);
    }
    a.result["orders"] = orders;
    return a;
}

Analysis invariants(const Scenario& sc) {
    const InvariantsBlock b = *sc.invariants;
    const PhaseSpec phase = sc.build_phase();
    const int n = phase.dimension();
    std::mt19937_64 rng(sc.seed);
    std::normal_distribution<double> normal;
    const Vec x = Vec::Zero(n);
    auto layout = JetLayout::get(n, b.max_order);
    double euler = 0.0, homog = 0.0;
    for (int s = 0; s < b.samples; ++s) {
        Vec xi(n);
        for (int i = 0; i < n; ++i) xi[i] = normal(rng);
        const double phi = eval_phase(phase, 0, x, xi);
        euler = std::max(euler, std::abs(xi.dot(phase_gradient(phase, 0, x, xi)) - phi) / std::abs(phi));
        for (std::size_t idx = 1; idx < layout->size(); ++idx) {
            const auto alpha = layout->exponents(idx);
            const int k = layout->degree(idx);
            const double base = eval_phase_deriv(phase, 0, x, xi, alpha).value;
            const double scaled = eval_phase_deriv(phase, 0, x, Vec(2.5 * xi), alpha).value;
            const double scale = std::max(std::abs(base), std::pow(xi.norm(), 1 - k));
            homog = std::max(homog, std::abs(scaled - std::pow(2.5, 1 - k) * base) / scale);
        }
    }
    Analysis a;
    a.result = {{"euler_identity_error", euler}, {"homogeneity_error", homog}, {"samples", b.samples}};
    if (!b.ft_points.empty()) {
        SurfaceTransform tr(density_of(phase));
        double asym = 0.0;
        for (const auto& p : b.ft_points) {
            if (static_cast<int>(p.size()) != n) throw ValidationError("/invariants/ft_points: wrong dimension");
            const Vec v = Eigen::Map<const Vec>(p.data(), n);
            asym = std::max(asym, std::abs(tr(v) - std::conj(tr(Vec(-v)))));
        }
        a.result["conjugate_asymmetry"] = asym;
    }
    return a;
}

Analysis report(const Scenario& sc) {
    Analysis a;
    a.result = json::object();
    auto add = [&](const char* key, Analysis (*fn)(const Scenario&), bool present) {
        if (!present) return;
        Analysis part = fn(sc);
        a.result[key] = part.result;
        a.violated = a.violated || part.violated;
        for (auto& s : part.series) {
            s.name = std::string(key) + "." + s.name;
            a.series.push_back(std::move(s));
        }
    };
    add("surface", analyze_surface, sc.surface.has_value());
    add("ft", ft_surface, sc.ft.has_value());
    add("fio", fio_decay, sc.fio.has_value());
    add("evolve", evolve_model, sc.evolve.has_value());
    add("hyperbolicity", check_hyp, sc.hyperbolicity.has_value());
    add("l2", check_l2, sc.l2.has_value());
    add("vdc", vdc_table, sc.vdc.has_value());
    add("invariants", invariants, sc.invariants.has_value());
    if (a.result.empty()) throw ValidationError("report: the scenario has no analysis block");

    json checks = json::array();
    bool pass = true;
    for (const auto& e : sc.expect) {
        json c = {{"path", e.path}};
        bool ok = false;
        const json::json_pointer ptr(e.path);
        if (!a.result.contains(ptr)) {
            c["note"] = "path not found in results";
        } else {
            const json& v = a.result.at(ptr);
            c["value"] = v;
            ok = true;
            if (e.equals) {
                c["equals"] = *e.equals;
                ok = ok && v == *e.equals;
            }
            if (e.min || e.max) {
                ok = ok && v.is_number();
                if (e.min) c["min"] = *e.min, ok = ok && v.is_number() && v.get<double>() >= *e.min;
                if (e.max) c["max"] = *e.max, ok = ok && v.is_number() && v.get<double>() <= *e.max;
            }
        }
        c["pass"] = ok;
        pass = pass && ok;
        checks.push_back(c);
    }
    a.result = {{"results", a.result},
                {"checks", checks},
                {"verdict", sc.expect.empty() ? "no-expectations" : (pass ? "pass" : "fail")}};
    return a;
}

// ---------------------------------------------------------------------------

json envelope(const Scenario* sc, const OutputContext& ctx, const std::string& status) {
    json e = {{"tool", "fresnel"},
              {"version", FRESNEL_VERSION},
              {"schema", kSchemaVersion},
              {"command", ctx.command},
              {"scenario", {{"sha256", ctx.sha256}}},
              {"status", status}};
    if (sc) e["scenario"]["id"] = sc->id;
    return e;
}

json write_outputs(const Scenario& sc, const Analysis& a, const OutputContext& ctx) {
    json doc = envelope(&sc, ctx, a.violated ? "violated" : "ok");
    if (!sc.description.empty()) doc["scenario"]["description"] = sc.description;
    doc["result"] = a.result;
    fs::create_directories(ctx.directory);
    const std::string stem = sc.id + "." + ctx.command;
    json files = json::array();
    std::string dat = header_comment(sc, ctx);
    int block = 0;
    for (const auto& s : a.series) {
        std::string csv = header_comment(sc, ctx);
        for (std::size_t c = 0; c < s.columns.size(); ++c) csv += (c ? "," : "") + s.columns[c];
        csv += "\n";
        for (const auto& row : s.rows) {
            for (std::size_t c = 0; c < row.size(); ++c) csv += (c ? "," : "") + csv_number(row[c]);
            csv += "\n";
        }
        const std::string name = stem + "." + s.name + ".csv";
        write_file(ctx.directory / name, csv);
        files.push_back(name);

        // gnuplot: one indexed block per series, selected with `index N`.
        dat += (block ? "\n\n" : "") + std::string("# index ") + std::to_string(block) + ": " + s.name + "\n# ";
        for (std::size_t c = 0; c < s.columns.size(); ++c) dat += (c ? " " : "") + s.columns[c];
        dat += "\n";
        for (const auto& row : s.rows) {
            for (std::size_t c = 0; c < row.size(); ++c) dat += (c ? " " : "") + csv_number(row[c]);
            dat += "\n";
        }
        ++block;
    }
    if (ctx.command == "report" && block > 0) {
        write_file(ctx.directory / (stem + ".dat"), dat);
        files.push_back(stem + ".dat");
    }
    doc["files"] = files;
    write_file(ctx.directory / (stem + ".json"), doc.dump(2) + "\n");
    return doc;
}

}  // namespace cli
