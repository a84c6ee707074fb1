#include "scenario.hpp"

#include <cmath>
#include <set>

#include "fresnel/errors.hpp"

namespace cli {

using fresnel::ValidationError;

namespace {

// Object view that records which keys were read; finish() rejects the rest.
class Obj {
public:
    Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("", "expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& at(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    std::string str(const std::string& key, const std::string& def = "") {
        if (!has(key)) return def;
        const json& v = at(key);
        if (!v.is_string()) fail(key, "expected a string");
        return v.get<std::string>();
    }
    std::string required_str(const std::string& key) {
        if (!has(key)) fail(key, "required");
        return str(key);
    }
    double num(const std::string& key, double def) {
        if (!has(key)) return def;
        const json& v = at(key);
        if (!v.is_number()) fail(key, "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail(key, "must be finite");
        return d;
    }
    double positive(const std::string& key, double def) {
        const double d = num(key, def);
        if (!(d > 0.0)) fail(key, "must be positive");
        return d;
    }
    int integer(const std::string& key, int def, int lo = std::numeric_limits<int>::min()) {
        if (!has(key)) return def;
        const json& v = at(key);
        if (!v.is_number_integer()) fail(key, "expected an integer");
        const int i = v.get<int>();
        if (i < lo) fail(key, "must be at least " + std::to_string(lo));
        return i;
    }
    bool boolean(const std::string& key, bool def) {
        if (!has(key)) return def;
        const json& v = at(key);
        if (!v.is_boolean()) fail(key, "expected true or false");
        return v.get<bool>();
    }
    std::vector<double> numbers(const std::string& key, std::vector<double> def) {
        if (!has(key)) return def;
        const json& v = at(key);
        if (!v.is_array() || v.empty()) fail(key, "expected a non-empty array of numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) fail(key, "expected a non-empty array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }
    Obj child(const std::string& key) { return Obj(at(key), sub(key)); }

    std::string sub(const std::string& key) const { return path_ + "/" + key; }

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
        throw ValidationError((key.empty() ? path_ : sub(key)) + ": " + msg);
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ValidationError(sub(it.key()) + ": unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

Coefficient parse_coefficient(const json& v, const std::string& path) {
    Coefficient c;
    if (v.is_number()) {
        c.value = v.get<double>();
    } else if (v.is_string()) {
        c.source = v.get<std::string>();
    } else {
        throw ValidationError(path + ": expected a number or an expression in t");
    }
    try {
        (void)c.build();
    } catch (const fresnel::Error& e) {
        throw ValidationError(path + ": " + e.what());
    }
    return c;
}

AnnulusBlock parse_annulus(Obj o) {
    AnnulusBlock a;
    a.center = o.positive("center", a.center);
    a.width = o.positive("width", a.width);
    o.finish();
    return a;
}

PhaseBlock parse_phase(Obj o) {
    PhaseBlock p;
    p.kind = o.required_str("kind");
    if (p.kind == "euclidean") {
        p.n = o.integer("n", 2, 1);
        p.radius = o.positive("radius", 1.0);
    } else if (p.kind == "anisotropic-power") {
        p.n = o.integer("n", 2, 1);
        p.exponent = o.integer("exponent", 4, 2);
        if (p.exponent % 2) o.fail("exponent", "must be even");
    } else if (p.kind == "star") {
        p.n = 2;
        p.eps = o.num("eps", 0.3);
        p.k = o.integer("k", 3, 1);
        if (!(std::abs(p.eps) < 1.0)) o.fail("eps", "must satisfy |eps| < 1");
    } else if (p.kind == "expression") {
        p.n = o.integer("n", 2, 1);
        p.source = o.required_str("source");
    } else if (p.kind == "time-averaged") {
        p.t = o.positive("t", 1.0);
        if (o.has("root")) p.root = o.integer("root", 0, 0);
    } else {
        o.fail("kind", "unknown phase kind '" + p.kind + "'");
    }
    o.finish();
    return p;
}

ModelBlock parse_model(Obj o) {
    ModelBlock m;
    m.kind = o.required_str("kind");
    m.n = o.integer("n", 2, 1);
    if (m.kind == "wave") {
        m.m = 2;
        if (!o.has("a")) o.fail("a", "required");
        const json& a = o.at("a");
        if (a.is_array()) {
            m.isotropic = false;
            if (a.size() != static_cast<std::size_t>(m.n)) o.fail("a", "expected an n x n matrix");
            for (std::size_t i = 0; i < a.size(); ++i) {
                if (!a[i].is_array() || a[i].size() != static_cast<std::size_t>(m.n))
                    o.fail("a", "expected an n x n matrix");
                std::vector<Coefficient> row;
                for (std::size_t j = 0; j < a[i].size(); ++j)
                    row.push_back(parse_coefficient(a[i][j], o.sub("a") + "/" + std::to_string(i) + "/" + std::to_string(j)));
                m.matrix.push_back(row);
            }
        } else {
            m.a = parse_coefficient(a, o.sub("a"));
        }
    } else if (m.kind == "higher-order") {
        m.m = o.integer("m", 2, 1);
        if (!o.has("terms") || !o.at("terms").is_array()) o.fail("terms", "required array");
        const json& terms = o.at("terms");
        for (std::size_t i = 0; i < terms.size(); ++i) {
            Obj t(terms[i], o.sub("terms") + "/" + std::to_string(i));
            ModelBlock::Term term;
            term.k = t.integer("k", 0, 0);
            if (term.k >= m.m) t.fail("k", "must be below m");
            if (t.has("alpha")) {
                const json& al = t.at("alpha");
                if (!al.is_array() || al.size() != static_cast<std::size_t>(m.n)) t.fail("alpha", "expected n integers");
                int order = 0;
                for (const auto& e : al) {
                    if (!e.is_number_integer() || e.get<int>() < 0) t.fail("alpha", "expected n non-negative integers");
                    term.alpha.push_back(e.get<int>());
                    order += e.get<int>();
                }
                if (order != m.m - term.k) t.fail("alpha", "order must equal m - k");
            }
            if (!t.has("coefficient")) t.fail("coefficient", "required");
            term.coefficient = parse_coefficient(t.at("coefficient"), t.sub("coefficient"));
            t.finish();
            m.terms.push_back(term);
        }
    } else if (m.kind == "diagonal-system") {
        m.m = 2;
    } else {
        o.fail("kind", "unknown model kind '" + m.kind + "'");
    }
    o.finish();
    return m;
}

AmplitudeBlock parse_amplitude(Obj o) {
    AmplitudeBlock a;
    a.kind = o.str("kind", "unit");
    if (a.kind == "constant") {
        a.value = o.num("value", 1.0);
    } else if (a.kind == "expression") {
        a.source = o.required_str("source");
    } else if (a.kind != "unit") {
        o.fail("kind", "unknown amplitude kind '" + a.kind + "'");
    }
    a.cutoff = o.num("cutoff", 0.0);
    if (a.cutoff < 0.0) o.fail("cutoff", "must be non-negative");
    o.finish();
    return a;
}

SurfaceBlock parse_surface(Obj o) {
    SurfaceBlock s;
    s.resolution_deg = o.num("resolution_deg", s.resolution_deg);
    if (s.resolution_deg < 0.0) o.fail("resolution_deg", "must be non-negative");
    s.gamma_max = o.integer("gamma_max", s.gamma_max, 2);
    s.tol = o.positive("tol", s.tol);
    s.refine_inflections = o.boolean("refine_inflections", s.refine_inflections);
    s.omega_count = o.integer("omega_count", s.omega_count, 4);
    o.finish();
    return s;
}

FtBlock parse_ft(Obj o) {
    FtBlock f;
    if (o.has("direction_deg")) f.direction_deg = o.num("direction_deg", 0.0);
    if (o.has("scan")) {
        Obj s = o.child("scan");
        f.scan_from_deg = s.num("from_deg", f.scan_from_deg);
        f.scan_to_deg = s.num("to_deg", f.scan_to_deg);
        f.scan_step_deg = s.positive("step_deg", f.scan_step_deg);
        f.scan_radius = s.positive("radius", f.scan_radius);
        if (f.scan_to_deg < f.scan_from_deg) s.fail("to_deg", "must not be below from_deg");
        s.finish();
    }
    f.r_min = o.positive("r_min", f.r_min);
    f.r_max = o.positive("r_max", f.r_max);
    f.count = o.integer("count", f.count, 8);
    f.window = o.num("window", f.window);
    if (!(f.window > 1.0)) o.fail("window", "must exceed 1");
    f.step = o.positive("step", f.step);
    f.abs_tol = o.positive("abs_tol", f.abs_tol);
    if (o.has("reference")) {
        Obj r = o.child("reference");
        f.reference = r.required_str("kind");
        if (f.reference != "circle" && f.reference != "sphere") r.fail("kind", "expected circle or sphere");
        f.reference_r_max = r.positive("r_max", f.reference_r_max);
        f.reference_count = r.integer("count", f.reference_count, 2);
        r.finish();
    }
    if (f.r_max / f.r_min < 10.0) o.fail("r_max", "fit window must span a decade");
    o.finish();
    return f;
}

void parse_times(Obj& o, double& t_min, double& t_max, int& count) {
    t_min = o.positive("t_min", t_min);
    t_max = o.positive("t_max", t_max);
    count = o.integer("count", count, 2);
    if (t_max <= t_min) o.fail("t_max", "must exceed t_min");
}

FioBlock parse_fio(Obj o) {
    FioBlock f;
    parse_times(o, f.t_min, f.t_max, f.count);
    f.rays = o.integer("rays", f.rays, 1);
    f.per_ray = o.integer("per_ray", f.per_ray, 2);
    f.radius_factor = o.positive("radius_factor", f.radius_factor);
    f.ray_offset_deg = o.num("ray_offset_deg", f.ray_offset_deg);
    f.rel_tol = o.positive("rel_tol", f.rel_tol);
    if (o.has("annulus")) f.annulus = parse_annulus(o.child("annulus"));
    o.finish();
    return f;
}

EvolveBlock parse_evolve(Obj o) {
    EvolveBlock e;
    e.method = o.str("method", e.method);
    if (e.method != "radial" && e.method != "grid") o.fail("method", "expected radial or grid");
    parse_times(o, e.t_min, e.t_max, e.count);
    e.extent = o.positive("extent", e.extent);
    e.points = o.integer("points", e.points, 4);
    if (e.points & (e.points - 1)) o.fail("points", "must be a power of two");
    e.rel_tol = o.positive("rel_tol", e.rel_tol);
    e.abs_tol = o.positive("abs_tol", e.abs_tol);
    if (o.has("annulus")) e.annulus = parse_annulus(o.child("annulus"));
    o.finish();
    return e;
}

HyperbolicityBlock parse_hyperbolicity(Obj o) {
    HyperbolicityBlock h;
    h.t_max = o.positive("t_max", h.t_max);
    h.ell = o.num("ell", h.ell);
    h.max_order = o.integer("max_order", h.max_order, 1);
    h.hh_t_max = o.positive("hh_t_max", h.hh_t_max);
    h.direction_deg = o.positive("direction_deg", h.direction_deg);
    h.geometry_times = o.numbers("geometry_times", h.geometry_times);
    for (double t : h.geometry_times)
        if (!(t > 0.0)) o.fail("geometry_times", "times must be positive");
    o.finish();
    return h;
}

L2Block parse_l2(Obj o) {
    L2Block l;
    l.t_grid = o.numbers("t_grid", l.t_grid);
    if (o.has("x")) {
        Obj x = o.child("x");
        l.x_min = x.num("min", l.x_min);
        l.x_max = x.num("max", l.x_max);
        l.x_count = x.integer("count", l.x_count, 1);
        if (l.x_max < l.x_min) x.fail("max", "must not be below min");
        x.finish();
    }
    l.direction_deg = o.positive("direction_deg", l.direction_deg);
    l.threshold = o.positive("threshold", l.threshold);
    if (o.has("uniformity")) {
        Obj u = o.child("uniformity");
        UniformityBlock b;
        b.tests = u.integer("tests", b.tests, 1);
        b.extent = u.positive("extent", b.extent);
        b.points = u.integer("points", b.points, 4);
        if (b.points & (b.points - 1)) u.fail("points", "must be a power of two");
        b.band = u.positive("band", b.band);
        parse_times(u, b.t_min, b.t_max, b.count);
        u.finish();
        l.uniformity = b;
    }
    o.finish();
    return l;
}

VdcBlock parse_vdc(Obj o) {
    VdcBlock v;
    if (o.has("k")) {
        v.k.clear();
        for (double k : o.numbers("k", {})) {
            if (k != std::floor(k) || k < 2) o.fail("k", "orders must be integers >= 2");
            v.k.push_back(static_cast<int>(k));
        }
    }
    v.lambda_min = o.positive("lambda_min", v.lambda_min);
    v.lambda_max = o.positive("lambda_max", v.lambda_max);
    v.count = o.integer("count", v.count, 2);
    v.inner = o.positive("inner", v.inner);
    v.outer = o.positive("outer", v.outer);
    if (v.outer <= v.inner) o.fail("outer", "must exceed inner");
    o.finish();
    return v;
}

InvariantsBlock parse_invariants(Obj o) {
    InvariantsBlock b;
    b.samples = o.integer("samples", b.samples, 1);
    b.max_order = o.integer("max_order", b.max_order, 1);
    if (o.has("ft_points")) {
        const json& pts = o.at("ft_points");
        if (!pts.is_array()) o.fail("ft_points", "expected an array of points");
        for (const auto& p : pts) {
            if (!p.is_array()) o.fail("ft_points", "expected an array of points");
            std::vector<double> v;
            for (const auto& e : p) {
                if (!e.is_number()) o.fail("ft_points", "coordinates must be numbers");
                v.push_back(e.get<double>());
            }
            b.ft_points.push_back(v);
        }
    }
    o.finish();
    return b;
}

}  // namespace

fresnel::TimeFunction Coefficient::build() const {
    if (value) return fresnel::TimeFunction::constant(*value);
    return fresnel::TimeFunction::expression(source);
}

Scenario parse_scenario(const json& doc) {
    Obj o(doc, "");
    Scenario s;
    s.id = o.required_str("id");
    if (s.id.empty() || s.id.find_first_of("/\\ ") != std::string::npos) o.fail("id", "must be a non-empty file-name-safe string");
    s.description = o.str("description");
    if (o.has("seed")) {
        const json& v = o.at("seed");
        if (!v.is_number_unsigned()) o.fail("seed", "expected a non-negative integer");
        s.seed = v.get<std::uint64_t>();
    }
    if (o.has("phase")) s.phase = parse_phase(o.child("phase"));
    if (o.has("model")) s.model = parse_model(o.child("model"));
    if (o.has("amplitude")) s.amplitude = parse_amplitude(o.child("amplitude"));
    if (o.has("surface")) s.surface = parse_surface(o.child("surface"));
    if (o.has("ft")) s.ft = parse_ft(o.child("ft"));
    if (o.has("fio")) s.fio = parse_fio(o.child("fio"));
    if (o.has("evolve")) s.evolve = parse_evolve(o.child("evolve"));
    if (o.has("hyperbolicity")) s.hyperbolicity = parse_hyperbolicity(o.child("hyperbolicity"));
    if (o.has("l2")) s.l2 = parse_l2(o.child("l2"));
    if (o.has("vdc")) s.vdc = parse_vdc(o.child("vdc"));
    if (o.has("invariants")) s.invariants = parse_invariants(o.child("invariants"));
    if (o.has("expect")) {
        const json& e = o.at("expect");
        if (!e.is_array()) o.fail("expect", "expected an array");
        for (std::size_t i = 0; i < e.size(); ++i) {
            Obj x(e[i], "/expect/" + std::to_string(i));
            Expectation ex;
            ex.path = x.required_str("path");
            try {
                (void)json::json_pointer(ex.path);
            } catch (const json::exception&) {
                x.fail("path", "not a JSON pointer");
            }
            if (x.has("min")) ex.min = x.num("min", 0.0);
            if (x.has("max")) ex.max = x.num("max", 0.0);
            if (x.has("equals")) ex.equals = x.at("equals");
            if (!ex.min && !ex.max && !ex.equals) x.fail("", "needs min, max or equals");
            x.finish();
            s.expect.push_back(ex);
        }
    }
    if (o.has("output")) {
        Obj out = o.child("output");
        s.output_directory = out.str("directory");
        out.finish();
    }
    o.finish();

    // Cross-block checks.
    if (s.phase && s.phase->kind == "time-averaged") {
        if (!s.model) o.fail("phase", "time-averaged phases need a model block");
        s.phase->n = s.model->n;
    }
    if (s.phase && s.model && s.phase->n != s.model->n) o.fail("phase", "dimension differs from the model");
    auto need_phase = [&](bool needed, const char* block) {
        if (needed && !s.phase) o.fail(block, "needs a phase block");
    };
    need_phase(s.surface.has_value(), "surface");
    need_phase(s.ft.has_value(), "ft");
    need_phase(s.fio.has_value(), "fio");
    need_phase(s.l2.has_value(), "l2");
    need_phase(s.invariants.has_value(), "invariants");
    if ((s.evolve || s.hyperbolicity) && !s.model) o.fail(s.evolve ? "evolve" : "hyperbolicity", "needs a model block");
    if (s.ft && s.phase->n != 2 && s.phase->n != 3) o.fail("ft", "surface transforms need n = 2 or 3");
    if (s.ft && !s.ft->direction_deg && s.phase->n != 2) o.fail("ft", "direction scans need n = 2; set direction_deg");
    if (s.ft && s.ft->reference == "circle" && !(s.phase->kind == "euclidean" && s.phase->n == 2 && s.phase->radius == 1.0))
        o.fail("ft", "the circle reference needs the unit circle");
    if (s.ft && s.ft->reference == "sphere" && !(s.phase->kind == "euclidean" && s.phase->n == 3 && s.phase->radius == 1.0))
        o.fail("ft", "the sphere reference needs the unit sphere");
    if (s.fio && s.phase->n != 2) o.fail("fio", "ray sampling needs n = 2");
    if (s.evolve && s.evolve->method == "radial" && !(s.model->kind == "wave" && s.model->isotropic && s.model->n == 2))
        o.fail("evolve", "the radial method needs an isotropic wave model with n = 2");
    if (s.l2 && s.l2->uniformity && s.phase->n != 2) o.fail("l2", "uniformity tests use n = 2 fields");

    // Expressions must compile now rather than halfway through a run.
    try {
        if (s.model) (void)s.build_model();
        if (s.phase && s.phase->kind != "time-averaged") (void)s.build_phase();
        (void)s.build_amplitude();
    } catch (const fresnel::Error& e) {
        throw ValidationError(std::string("/phase, /model or /amplitude: ") + e.what());
    }
    return s;
}

int Scenario::dimension() const {
    if (phase) return phase->n;
    if (model) return model->n;
    return 2;
}

fresnel::PhaseSpec Scenario::build_phase() const {
    using fresnel::PhaseSpec;
    const PhaseBlock& p = *phase;
    if (p.kind == "euclidean") return PhaseSpec::euclidean(p.n, p.radius);
    if (p.kind == "anisotropic-power") return PhaseSpec::anisotropic_power(p.n, p.exponent);
    if (p.kind == "star") return PhaseSpec::star(p.eps, p.k);
    if (p.kind == "expression") return PhaseSpec::expression(p.n, p.source);
    return fresnel::fresnel_phase_at(build_model(), p.t, p.root);
}

fresnel::EvolutionSpec Scenario::build_model() const {
    const ModelBlock& m = *model;
    if (m.kind == "wave") {
        if (m.isotropic) return fresnel::WaveModelSpec::isotropic_model(m.n, m.a.build());
        fresnel::WaveModelSpec w;
        w.n = m.n;
        for (const auto& row : m.matrix) {
            std::vector<fresnel::TimeFunction> r;
            for (const auto& c : row) r.push_back(c.build());
            w.a.push_back(r);
        }
        return w;
    }
    if (m.kind == "higher-order") {
        fresnel::HigherOrderSpec h;
        h.n = m.n;
        h.m = m.m;
        for (const auto& t : m.terms) h.terms.push_back({t.k, t.alpha, t.coefficient.build()});
        return h;
    }
    return fresnel::SystemSpec::diagonal_wave(m.n);
}

fresnel::AmplitudeSpec Scenario::build_amplitude() const {
    fresnel::AmplitudeSpec a = amplitude.kind == "constant"     ? fresnel::AmplitudeSpec::constant(amplitude.value)
                               : amplitude.kind == "expression" ? fresnel::AmplitudeSpec::expression(dimension(), amplitude.source)
                                                                : fresnel::AmplitudeSpec::unit();
    return amplitude.cutoff > 0.0 ? a.with_cutoff(amplitude.cutoff) : a;
}

}  // namespace cli
