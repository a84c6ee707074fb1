// fresnel: command-line driver for scenario files.
//
// Exit status: 0 on success (including reported hypothesis violations),
// 1 on computation errors, 2 on invalid input.

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "commands.hpp"
#include "fresnel/errors.hpp"
#include "fresnel/parallel.hpp"

namespace {

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 failed");
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

struct Command {
    const char* name;
    const char* help;
    cli::Analysis (*run)(const cli::Scenario&);
    bool (*has_block)(const cli::Scenario&);
};

const Command kCommands[] = {
    {"analyze-surface", "contact orders, curvature and rate prediction of the phase surface", cli::analyze_surface,
     [](const cli::Scenario&) { return true; }},
    {"ft-surface", "decay of the surface-measure Fourier transform", cli::ft_surface,
     [](const cli::Scenario& s) { return s.ft.has_value(); }},
    {"fio-decay", "sup-norm decay of the model operator on annular data", cli::fio_decay,
     [](const cli::Scenario& s) { return s.fio.has_value(); }},
    {"evolve", "evolve annular data under the model and fit the sup-norm decay", cli::evolve_model,
     [](const cli::Scenario& s) { return s.evolve.has_value(); }},
    {"check-hyp", "coefficient classes, strict hyperbolicity, hh condition and phase geometry", cli::check_hyp,
     [](const cli::Scenario&) { return true; }},
    {"check-l2", "determinant and uniform L2 checks", cli::check_l2, [](const cli::Scenario& s) { return s.l2.has_value(); }},
    {"report", "run every analysis in the scenario and check its expectations", cli::report,
     [](const cli::Scenario&) { return true; }},
};

int fail(const cli::Scenario* sc, cli::OutputContext& ctx, const std::string& status, const std::string& message, int code) {
    cli::json doc = cli::envelope(sc, ctx, status);
    doc["error"] = message;
    std::cout << doc.dump(2) << "\n";
    std::cerr << "fresnel: " << message << "\n";
    return code;
}

int run(const Command& cmd, const std::string& path, const std::string& out_override) {
    cli::OutputContext ctx{cmd.name, path, "", {}};
    std::ifstream in(path, std::ios::binary);
    if (!in) return fail(nullptr, ctx, "invalid", "cannot read scenario file '" + path + "'", 2);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    ctx.sha256 = sha256_hex(text);

    cli::Scenario sc;
    try {
        sc = cli::parse_scenario(cli::json::parse(text));
        if (!cmd.has_block(sc)) throw fresnel::ValidationError(std::string(cmd.name) + ": the scenario lacks the block this command needs");
        if (std::string(cmd.name) == "analyze-surface" && !sc.phase) throw fresnel::ValidationError("/phase: required");
        if (std::string(cmd.name) == "check-hyp" && !sc.model) throw fresnel::ValidationError("/model: required");
    } catch (const cli::json::exception& e) {
        return fail(nullptr, ctx, "invalid", std::string("scenario is not valid JSON: ") + e.what(), 2);
    } catch (const fresnel::ValidationError& e) {
        return fail(nullptr, ctx, "invalid", e.what(), 2);
    }
    ctx.directory = !out_override.empty()          ? out_override
                    : !sc.output_directory.empty() ? sc.output_directory
                                                   : "fresnel-out/" + sc.id;
    try {
        const cli::json doc = cli::write_outputs(sc, cmd.run(sc), ctx);
        std::cout << doc.dump(2) << "\n";
        return 0;
    } catch (const fresnel::HypothesisViolation& e) {
        return fail(&sc, ctx, "violated", e.what(), 0);
    } catch (const fresnel::DistinctnessError& e) {
        return fail(&sc, ctx, "violated", e.what(), 0);
    } catch (const fresnel::ValidationError& e) {
        return fail(&sc, ctx, "invalid", e.what(), 2);
    } catch (const fresnel::UsageError& e) {
        return fail(&sc, ctx, "invalid", e.what(), 2);
    } catch (const std::exception& e) {
        return fail(&sc, ctx, "error", e.what(), 1);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fresnel: dispersive decay analysis of Fourier integral operators"};
    app.set_version_flag("--version", FRESNEL_VERSION);
    app.require_subcommand(1);
    unsigned threads = 0;
    app.add_option("--threads", threads, "worker threads (0: all cores; falls back to FRESNEL_THREADS)");

    std::string scenario, out;
    const Command* chosen = nullptr;
    for (const auto& cmd : kCommands) {
        CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
        sub->add_option("scenario", scenario, "scenario JSON file")->required();
        sub->add_option("--out", out, "output directory (default: scenario output.directory or fresnel-out/<id>)");
        sub->callback([&chosen, &cmd] { chosen = &cmd; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (threads == 0) {
        if (const char* env = std::getenv("FRESNEL_THREADS")) {
            char* end = nullptr;
            const long v = std::strtol(env, &end, 10);
            if (end == env || *end != '\0' || v < 0) {
                std::cerr << "fresnel: FRESNEL_THREADS must be a non-negative integer\n";
                return 2;
            }
            threads = static_cast<unsigned>(v);
        }
    }
    fresnel::set_thread_count(threads);
    return run(*chosen, scenario, out);
}
