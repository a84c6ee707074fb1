#pragma once

// Scenario files: parsing, schema validation and construction of the library
// objects they describe. Every block is validated before any computation;
// unknown keys are rejected.

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "fresnel/evolution.hpp"
#include "fresnel/oscint.hpp"
#include "fresnel/phase.hpp"

namespace cli {

using json = nlohmann::json;

struct PhaseBlock {
    std::string kind;  // euclidean | anisotropic-power | star | expression | time-averaged
    int n = 2;
    double radius = 1.0;
    int exponent = 4;
    double eps = 0.3;
    int k = 3;
    std::string source;
    double t = 1.0;           // time-averaged
    std::optional<int> root;  // time-averaged; default largest
};

struct Coefficient {
    std::optional<double> value;
    std::string source;
    fresnel::TimeFunction build() const;
};

struct ModelBlock {
    std::string kind;  // wave | higher-order | diagonal-system
    int n = 2;
    int m = 2;
    bool isotropic = true;
    Coefficient a;                               // isotropic wave
    std::vector<std::vector<Coefficient>> matrix;  // anisotropic wave
    struct Term {
        int k = 0;
        std::vector<int> alpha;
        Coefficient coefficient;
    };
    std::vector<Term> terms;
};

struct AmplitudeBlock {
    std::string kind = "unit";  // unit | constant | expression
    double value = 1.0;
    std::string source;
    double cutoff = 0.0;
};

struct AnnulusBlock {
    double center = 1.5;
    double width = 0.25;
    fresnel::AnnulusProfile profile() const { return {center, width}; }
};

struct SurfaceBlock {
    double resolution_deg = 0.0;
    int gamma_max = 8;
    double tol = 1e-5;
    bool refine_inflections = false;
    int omega_count = 72;
};

struct FtBlock {
    std::optional<double> direction_deg;  // empty: scan for the slowest direction (n = 2)
    double scan_from_deg = 0.0;
    double scan_to_deg = 45.0;
    double scan_step_deg = 5.0;
    double scan_radius = 500.0;
    double r_min = 20.0;
    double r_max = 500.0;
    int count = 16;
    double window = 1.25;
    double step = 0.1;
    double abs_tol = 1e-8;
    std::string reference;  // "" | circle | sphere
    double reference_r_max = 50.0;
    int reference_count = 501;
};

struct FioBlock {
    double t_min = 10.0;
    double t_max = 500.0;
    int count = 12;
    int rays = 16;
    int per_ray = 400;
    double radius_factor = 1.5;
    double ray_offset_deg = 0.0;
    double rel_tol = 1e-8;
    AnnulusBlock annulus;
};

struct EvolveBlock {
    std::string method = "radial";  // radial | grid
    double t_min = 10.0;
    double t_max = 500.0;
    int count = 12;
    double extent = 50.0;
    int points = 64;
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    AnnulusBlock annulus;
};

struct HyperbolicityBlock {
    double t_max = 1e4;
    double ell = 0.0;
    int max_order = 3;
    double hh_t_max = 200.0;
    double direction_deg = 30.0;
    std::vector<double> geometry_times{1.0, 10.0, 100.0};
};

struct UniformityBlock {
    int tests = 10;
    double extent = 40.0;
    int points = 32;
    double band = 3.0;
    double t_min = 1.0;
    double t_max = 100.0;
    int count = 12;
};

struct L2Block {
    std::vector<double> t_grid{1.0, 10.0, 100.0};
    double x_min = -3.0;
    double x_max = 3.0;
    int x_count = 61;
    double direction_deg = 30.0;
    double threshold = 1e-3;
    std::optional<UniformityBlock> uniformity;
};

struct VdcBlock {
    std::vector<int> k{2, 3};
    double lambda_min = 10.0;
    double lambda_max = 1e4;
    int count = 13;
    double inner = 0.5;
    double outer = 1.0;
};

struct InvariantsBlock {
    int samples = 20;
    int max_order = 3;
    std::vector<std::vector<double>> ft_points;
};

struct Expectation {
    std::string path;  // JSON pointer into the report results
    std::optional<double> min, max;
    std::optional<json> equals;
};

struct Scenario {
    std::string id;
    std::string description;
    std::uint64_t seed = 1;
    std::optional<PhaseBlock> phase;
    std::optional<ModelBlock> model;
    AmplitudeBlock amplitude;
    std::optional<SurfaceBlock> surface;
    std::optional<FtBlock> ft;
    std::optional<FioBlock> fio;
    std::optional<EvolveBlock> evolve;
    std::optional<HyperbolicityBlock> hyperbolicity;
    std::optional<L2Block> l2;
    std::optional<VdcBlock> vdc;
    std::optional<InvariantsBlock> invariants;
    std::vector<Expectation> expect;
    std::string output_directory;

    fresnel::PhaseSpec build_phase() const;
    fresnel::EvolutionSpec build_model() const;
    fresnel::AmplitudeSpec build_amplitude() const;
    int dimension() const;
};

/// Throws fresnel::ValidationError with the offending key path.
Scenario parse_scenario(const json& doc);

}  // namespace cli
