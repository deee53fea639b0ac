// Command-line surface for the vortex pooling kernels: tensor generation,
// module forward passes, equivalence and gradient verification, footprint
// analysis, and the pyramid benchmark. Machine-readable output is one JSON
// object per line on stdout; diagnostics go to stderr.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vortex/vortex.hpp"

using nlohmann::json;

namespace {

vortex::Dtype parse_dtype(const std::string& s) {
    if (s == "f32") return vortex::Dtype::f32;
    if (s == "f64") return vortex::Dtype::f64;
    throw CLI::ValidationError("--dtype", "expected f32 or f64, got '" + s + "'");
}

std::pair<int, int> parse_pixel(const std::string& s) {
    const std::size_t comma = s.find(',');
    if (comma == std::string::npos)
        throw CLI::ValidationError("--pixel", "expected R,C, got '" + s + "'");
    try {
        return {std::stoi(s.substr(0, comma)), std::stoi(s.substr(comma + 1))};
    } catch (...) {
        throw CLI::ValidationError("--pixel", "bad integer in '" + s + "'");
    }
}

json footprint_json(const vortex::FootprintReport& rep) {
    return json{{"mode", rep.mode == vortex::FootprintMode::clipped ? "clipped" : "unclipped"},
                {"u", rep.u},
                {"h", rep.h},
                {"w", rep.w},
                {"r", rep.r},
                {"pixel", {rep.pixel_row, rep.pixel_col}}};
}

json bench_json(const vortex::BenchResult& r) {
    return json{{"impl", r.impl_name},
                {"h", r.h},
                {"w", r.w},
                {"c", r.c},
                {"dtype", vortex::dtype_name(r.dtype)},
                {"reps", r.reps},
                {"threads", r.threads},
                {"median_ns", r.median_ns},
                {"per_element_ns", r.per_element_ns},
                {"add_count", r.add_count},
                {"speedup_vs_naive", r.speedup_vs_naive}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vortex pooling toolkit"};
    app.require_subcommand(1);
    // several subcommands take --h as a map height, so keep help on --help only
    app.set_help_flag("--help", "print help and exit");
    auto add_sub = [&app](const std::string& name, const std::string& desc) {
        CLI::App* sc = app.add_subcommand(name, desc);
        sc->set_help_flag("--help", "print help and exit");
        return sc;
    };

    // --- gen ---
    auto* gen = add_sub("gen", "write a seeded random feature map");
    std::uint64_t gen_seed = 0;
    int gen_h = 0, gen_w = 0, gen_c = 0;
    std::string gen_dtype = "f64", gen_out;
    gen->add_option("--seed", gen_seed, "rng seed")->required();
    gen->add_option("--h", gen_h)->required()->check(CLI::PositiveNumber);
    gen->add_option("--w", gen_w)->required()->check(CLI::PositiveNumber);
    gen->add_option("--c", gen_c)->required()->check(CLI::PositiveNumber);
    gen->add_option("--dtype", gen_dtype, "f32 or f64");
    gen->add_option("--out", gen_out, "output .fmap path")->required();

    // --- gen-weights ---
    auto* genw = add_sub("gen-weights",
                                    "write a seeded random weight bank for a config");
    std::string genw_config, genw_out;
    std::uint64_t genw_seed = 0;
    int genw_in_c = 0, genw_head_out = 0;
    genw->add_option("--config", genw_config)->required();
    genw->add_option("--seed", genw_seed)->required();
    genw->add_option("--in-c", genw_in_c, "input channel count")
        ->required()
        ->check(CLI::PositiveNumber);
    genw->add_option("--head-out-c", genw_head_out,
                     "also emit a 'head_proj' 1x1 entry with this out_c");
    genw->add_option("--out", genw_out, "output .vpwb path")->required();

    // --- forward ---
    auto* fwd = add_sub("forward", "run module_forward on a feature map");
    std::string fwd_config, fwd_weights, fwd_input, fwd_output, fwd_impl;
    bool fwd_head = false;
    int fwd_out_h = 0, fwd_out_w = 0;
    fwd->add_option("--config", fwd_config)->required();
    fwd->add_option("--weights", fwd_weights)->required();
    fwd->add_option("--input", fwd_input)->required();
    fwd->add_option("--output", fwd_output)->required();
    fwd->add_option("--impl", fwd_impl, "naive or cascaded (overrides config)");
    fwd->add_flag("--head", fwd_head, "apply the 1x1 'head_proj' + upsample head");
    fwd->add_option("--out-h", fwd_out_h, "head output height (default: input height)");
    fwd->add_option("--out-w", fwd_out_w, "head output width (default: input width)");

    // --- eq-check ---
    auto* eq = add_sub("eq-check",
                                  "pyramid and module equivalence property suites");
    std::uint64_t eq_seed = 1;
    int eq_cases = 200, eq_max_size = 64;
    eq->add_option("--seed", eq_seed);
    eq->add_option("--cases", eq_cases)->check(CLI::PositiveNumber);
    eq->add_option("--max-size", eq_max_size)->check(CLI::PositiveNumber);

    // --- footprint ---
    auto* fp = add_sub("footprint", "utilization-ratio analysis");
    std::string fp_config, fp_pixel, fp_mode = "both";
    int fp_h = 0, fp_w = 0;
    fp->add_option("--config", fp_config)->required();
    fp->add_option("--h", fp_h)->required()->check(CLI::PositiveNumber);
    fp->add_option("--w", fp_w)->required()->check(CLI::PositiveNumber);
    fp->add_option("--pixel", fp_pixel, "R,C (default: center)");
    fp->add_option("--mode", fp_mode, "clipped | unclipped | both");

    // --- gradcheck ---
    auto* gc = add_sub("gradcheck", "finite-difference gradient suites");
    double gc_eps = 1e-5, gc_tol = 1e-6;
    gc->add_option("--eps", gc_eps)->check(CLI::PositiveNumber);
    gc->add_option("--tol", gc_tol)->check(CLI::PositiveNumber);

    // --- diff ---
    auto* diff = add_sub("diff", "compare two feature map files");
    std::string diff_a, diff_b;
    double diff_tol = 1e-9;
    diff->add_option("a", diff_a, "first .fmap")->required();
    diff->add_option("b", diff_b, "second .fmap")->required();
    diff->add_option("--tol", diff_tol, "max elementwise abs difference");

    // --- bench ---
    auto* bench = add_sub("bench", "time naive vs cascaded pyramids");
    int b_k = 3, b_levels = 3, b_h = 129, b_w = 129, b_c = 64, b_reps = 5, b_threads = 1;
    std::string b_dtype = "f32";
    bool b_no_integral = false;
    bench->add_option("--k", b_k)->check(CLI::PositiveNumber);
    bench->add_option("--levels", b_levels)->check(CLI::PositiveNumber);
    bench->add_option("--h", b_h)->check(CLI::PositiveNumber);
    bench->add_option("--w", b_w)->check(CLI::PositiveNumber);
    bench->add_option("--c", b_c)->check(CLI::PositiveNumber);
    bench->add_option("--dtype", b_dtype, "f32 or f64");
    bench->add_option("--reps", b_reps)->check(CLI::Range(5, 1000000));
    bench->add_option("--threads", b_threads)->check(CLI::PositiveNumber);
    bench->add_flag("--no-integral", b_no_integral, "skip the integral-image contender");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            vortex::fmap_write(
                vortex::rng_fill(gen_seed, gen_h, gen_w, gen_c, parse_dtype(gen_dtype)),
                gen_out);
            return 0;
        }

        if (genw->parsed()) {
            vortex::ModuleConfig cfg = vortex::config_load(genw_config);
            vortex::WeightBank bank = vortex::make_rng_bank(cfg, genw_in_c, genw_seed);
            if (genw_head_out > 0) {
                int total = cfg.branch_out_c * static_cast<int>(cfg.branches.size());
                if (cfg.include_image_level) total += cfg.branch_out_c;
                bank.put("head_proj",
                         vortex::rng_weights(genw_seed + 1, genw_head_out, total, 1, 1));
            }
            vortex::wbank_write(bank, genw_out);
            return 0;
        }

        if (fwd->parsed()) {
            vortex::ModuleConfig cfg = vortex::config_load(fwd_config);
            if (fwd_impl == "naive") cfg.pyramid_impl = vortex::PyramidImpl::naive;
            else if (fwd_impl == "cascaded") cfg.pyramid_impl = vortex::PyramidImpl::cascaded;
            else if (!fwd_impl.empty())
                throw CLI::ValidationError("--impl", "expected naive or cascaded");
            vortex::WeightBank bank = vortex::wbank_read(fwd_weights);
            vortex::FeatureMap X = vortex::fmap_read(fwd_input);
            vortex::FeatureMap Y = vortex::module_forward(X, cfg, bank);
            if (!fwd_head) {
                if (cfg.include_image_level) {
                    vortex::FeatureMap Yg = vortex::image_level_feature(
                        X, bank.get("image_level"), X.h, X.w);
                    Y = vortex::concat_channels(
                        std::vector<const vortex::FeatureMap*>{&Y, &Yg});
                }
                vortex::fmap_write(Y, fwd_output);
                return 0;
            }
            vortex::HeadConfig head;
            head.proj = bank.get("head_proj");
            head.out_h = fwd_out_h > 0 ? fwd_out_h : X.h;
            head.out_w = fwd_out_w > 0 ? fwd_out_w : X.w;
            vortex::FeatureMap logits =
                cfg.include_image_level
                    ? vortex::seg_head(Y,
                                       vortex::image_level_feature(
                                           X, bank.get("image_level"), X.h, X.w),
                                       head)
                    : vortex::seg_head(Y, head);
            vortex::fmap_write(logits, fwd_output);
            return 0;
        }

        if (eq->parsed()) {
            vortex::EquivalenceResult pyr =
                vortex::run_pyramid_equivalence(eq_cases, eq_seed, eq_max_size);
            std::cout << json{{"suite", "pyramid"},
                              {"cases", pyr.cases},
                              {"worst_diff", pyr.worst_diff},
                              {"worst_case", pyr.worst_case},
                              {"passed", pyr.passed}}
                      << "\n";
            vortex::EquivalenceResult mod = vortex::run_module_equivalence(
                std::max(1, eq_cases / 2), eq_seed + 1, 8, std::min(eq_max_size, 64));
            std::cout << json{{"suite", "module_b"},
                              {"cases", mod.cases},
                              {"worst_diff", mod.worst_diff},
                              {"worst_case", mod.worst_case},
                              {"passed", mod.passed}}
                      << "\n";
            return pyr.passed && mod.passed ? 0 : 1;
        }

        if (fp->parsed()) {
            vortex::ModuleConfig cfg = vortex::config_load(fp_config);
            std::pair<int, int> pixel = fp_pixel.empty()
                                            ? std::pair<int, int>{fp_h / 2, fp_w / 2}
                                            : parse_pixel(fp_pixel);
            if (fp_mode != "clipped" && fp_mode != "unclipped" && fp_mode != "both")
                throw CLI::ValidationError("--mode",
                                           "expected clipped, unclipped or both");
            if (fp_mode != "clipped")
                std::cout << footprint_json(vortex::footprint(
                                 cfg, fp_h, fp_w, pixel, vortex::FootprintMode::unclipped))
                          << "\n";
            if (fp_mode != "unclipped")
                std::cout << footprint_json(vortex::footprint(
                                 cfg, fp_h, fp_w, pixel, vortex::FootprintMode::clipped))
                          << "\n";
            return 0;
        }

        if (gc->parsed()) {
            bool all_ok = true;
            for (const vortex::GradCheckReport& rep :
                 vortex::run_gradcheck_suite(gc_eps, gc_tol)) {
                std::cout << json{{"op", rep.op_name},
                                  {"max_rel_err", rep.max_rel_err},
                                  {"worst_index", rep.worst_index},
                                  {"passed", rep.passed}}
                          << "\n";
                all_ok = all_ok && rep.passed;
            }
            return all_ok ? 0 : 1;
        }

        if (diff->parsed()) {
            vortex::FeatureMap a = vortex::fmap_read(diff_a);
            vortex::FeatureMap b = vortex::fmap_read(diff_b);
            if (a.h != b.h || a.w != b.w || a.c != b.c) {
                std::cerr << "error: shape mismatch\n";
                return 1;
            }
            double worst = 0.0;
            for (std::size_t i = 0; i < a.data.size(); ++i)
                worst = std::max(worst, std::fabs(a.data[i] - b.data[i]));
            std::cout << json{{"max_abs_diff", worst}, {"tol", diff_tol},
                              {"passed", worst <= diff_tol}}
                      << "\n";
            return worst <= diff_tol ? 0 : 1;
        }

        if (bench->parsed()) {
            for (const vortex::BenchResult& r :
                 vortex::bench_pyramid(b_k, b_levels, b_h, b_w, b_c,
                                       parse_dtype(b_dtype), b_reps, !b_no_integral,
                                       b_threads))
                std::cout << bench_json(r) << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
