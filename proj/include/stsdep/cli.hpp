#ifndef STSDEP_CLI_HPP_
#define STSDEP_CLI_HPP_

// Command-line front end. run_cli is callable in-process (the tests do) and
// returns the exit status: 0 ok, 1 usage, 2 data/format, 3 numerical.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "stsdep/battery.hpp"
#include "stsdep/bitseq.hpp"
#include "stsdep/depscope.hpp"
#include "stsdep/errors.hpp"
#include "stsdep/genrand.hpp"
#include "stsdep/minset.hpp"
#include "stsdep/pmatrix.hpp"

namespace stsdep::cli {

namespace fs = std::filesystem;
using nlohmann::json;

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidSpec:
    case ErrorCode::InvalidParams: return kUsage;
    case ErrorCode::NumericalFailure: return kNumerical;
    default: return kData;
  }
}

namespace detail {

inline std::string fmt(double v, const char* spec = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

struct GeneratorOptions {
  std::string kind = "mt19937";
  std::uint32_t seed = 5489;
  std::string key = std::string(32, '0');
  std::string counter = std::string(32, '0');
  std::size_t first_index = 0;

  void add_to(CLI::App* app) {
    app->add_option("--kind", kind, "Generator: mt19937 or aes128-ctr")->capture_default_str();
    app->add_option("--seed", seed, "MT19937 seed")->capture_default_str();
    app->add_option("--key", key, "AES-128 key, 32 hex digits")->capture_default_str();
    app->add_option("--counter", counter, "AES-128 initial counter, 32 hex digits")->capture_default_str();
    app->add_option("--first-index", first_index, "0-based index of the first sequence in the stream")
        ->capture_default_str();
  }

  GeneratorSpec spec() const {
    GeneratorSpec g;
    g.kind = parse_generator_kind(kind);
    g.seed = seed;
    g.key = parse_hex128(key);
    g.counter0 = parse_hex128(counter);
    g.sequence_index = first_index;
    return g;
  }

  json to_json() const {
    const auto g = spec();
    json j = {{"type", "generator"}, {"kind", to_string(g.kind)}, {"first_index", first_index}};
    if (g.kind == GeneratorKind::Mt19937) {
      j["seed"] = seed;
    } else {
      j["key"] = to_hex(g.key);
      j["counter"] = to_hex(g.counter0);
    }
    return j;
  }
};

struct ParamOverrides {
  std::optional<std::size_t> block_frequency_M, longest_run_M, linear_complexity_M, universal_Q;
  std::optional<unsigned> universal_L, approx_entropy_m, serial_m;
  bool dft_corrected = false;

  void add_to(CLI::App* app) {
    app->add_option("--block-frequency-M", block_frequency_M, "Block frequency block length");
    app->add_option("--longest-run-M", longest_run_M, "Longest-run block length (8, 128, 10000)");
    app->add_option("--universal-L", universal_L, "Universal block length L");
    app->add_option("--universal-Q", universal_Q, "Universal initialisation blocks Q");
    app->add_option("--approx-entropy-m", approx_entropy_m, "Approximate entropy m");
    app->add_option("--serial-m", serial_m, "Serial m");
    app->add_option("--linear-complexity-M", linear_complexity_M, "Linear complexity block length");
    app->add_flag("--dft-corrected-variance", dft_corrected,
                  "Use the corrected DFT variance n*0.95*0.05/3.8 instead of the reference /4");
  }

  BatteryParams apply(std::size_t n) const {
    auto p = BatteryParams::defaults_for(n);
    if (block_frequency_M) p.block_frequency_M = *block_frequency_M;
    if (longest_run_M) p.longest_run_M = *longest_run_M;
    if (universal_L) {
      p.universal_L = *universal_L;
      p.universal_Q = std::size_t{10} << *universal_L;
    }
    if (universal_Q) p.universal_Q = *universal_Q;
    if (approx_entropy_m) p.approx_entropy_m = *approx_entropy_m;
    if (serial_m) p.serial_m = *serial_m;
    if (linear_complexity_M) p.linear_complexity_M = *linear_complexity_M;
    p.dft_corrected_variance = dft_corrected;
    p.validate();
    return p;
  }
};

inline void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  stsdep::detail::spit(path, text);
}

inline ActiveSet matrix_items(const PValueMatrix& mat) { return ActiveSet::from_indices(mat.items()); }

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"stsdep: SP800-22 battery p-value matrices and item-dependency analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "stsdep 0.1.0");

  // gen
  auto* gen = app.add_subcommand("gen", "Write generator output as sequence files");
  detail::GeneratorOptions gen_opts;
  gen_opts.add_to(gen);
  std::size_t gen_n = 0, gen_m = 1;
  std::string gen_out, gen_format = "bin";
  bool gen_packed = false;
  gen->add_option("--n", gen_n, "Bits per sequence")->required()->check(CLI::PositiveNumber);
  gen->add_option("--m", gen_m, "Number of sequences")->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--format", gen_format, "bin or txt")->check(CLI::IsMember({"bin", "txt"}))->capture_default_str();
  gen->add_flag("--packed", gen_packed, "One file holding all m*n bits instead of m files");

  // run
  auto* run = app.add_subcommand("run", "Compute the m x 162 p-value matrix");
  detail::GeneratorOptions run_gen;
  run_gen.add_to(run);
  detail::ParamOverrides run_params;
  run_params.add_to(run);
  std::size_t run_n = 0, run_m = 0, workers = 1;
  std::vector<std::string> run_inputs;
  std::string run_out, run_format;
  run->add_option("--n", run_n, "Bits per sequence (inline generation)");
  run->add_option("--m", run_m, "Number of sequences (inline generation)");
  run->add_option("--input", run_inputs, "Sequence files (.bin with .len sidecar, or ASCII 0/1)");
  run->add_option("--out", run_out, "Matrix file (.csv for CSV, anything else binary)")->required();
  run->add_option("--format", run_format, "bin or csv (default: from the extension)")
      ->check(CLI::IsMember({"bin", "csv"}));
  run->add_option("--workers", workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Histogram of q and the indicator I");
  std::string an_matrix, an_items, an_out, an_format = "csv";
  bool an_scramble = false;
  std::size_t an_bins = kDefaultBins;
  analyze->add_option("--matrix", an_matrix, "Matrix file")->required();
  analyze->add_flag("--scramble", an_scramble, "Use the scrambled statistic");
  analyze->add_option("--bins", an_bins, "Interior histogram bins")->capture_default_str();
  analyze->add_option("--items", an_items, "File listing the active item ids (default: all)");
  analyze->add_option("--out", an_out, "Histogram output file");
  analyze->add_option("--format", an_format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

  // minset
  auto* minset = app.add_subcommand("minset", "Greedy item removal toward I = 1");
  std::string ms_matrix, ms_stop = "full", ms_out, ms_format = "csv";
  double ms_delta = 0.01;
  std::size_t ms_kmin = 1, ms_last = 25;
  minset->add_option("--matrix", ms_matrix, "Matrix file")->required();
  minset->add_option("--stop", ms_stop, "full, threshold or kmin")
      ->check(CLI::IsMember({"full", "threshold", "kmin"}))->capture_default_str();
  minset->add_option("--delta", ms_delta, "Selected set: first I <= 1 + delta")->capture_default_str();
  minset->add_option("--k-min", ms_kmin, "Stop at this many items (--stop kmin)")->capture_default_str();
  minset->add_option("--last", ms_last, "Also write the last K survivors")->capture_default_str();
  minset->add_option("--out", ms_out, "Output prefix")->required();
  minset->add_option("--format", ms_format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

  // overlap
  auto* overlap = app.add_subcommand("overlap", "Overlap of two item sets against the hypergeometric law");
  std::string ov_a, ov_b;
  std::size_t ov_universe = kBatterySize;
  overlap->add_option("set_a", ov_a, "Item list file")->required();
  overlap->add_option("set_b", ov_b, "Item list file")->required();
  overlap->add_option("--universe", ov_universe, "Universe size N")->capture_default_str();

  // report
  auto* report = app.add_subcommand("report", "sd of q against n over several matrices");
  std::vector<std::string> rp_matrices;
  std::string rp_out, rp_format = "csv";
  report->add_option("--matrix", rp_matrices, "Matrix files")->required();
  report->add_option("--out", rp_out, "Report file");
  report->add_option("--format", rp_format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) {
      const auto spec = gen_opts.spec();
      fs::create_directories(gen_out);
      json config = {{"command", "gen"}, {"generator", gen_opts.to_json()}, {"n", gen_n}, {"m", gen_m},
                     {"format", gen_format}, {"packed", gen_packed}};
      json files = json::array();
      BitStream stream(spec, static_cast<std::uint64_t>(spec.sequence_index) * gen_n);
      auto emit = [&](const std::string& stem, const BitSequence& s) {
        const fs::path path = fs::path(gen_out) / (stem + "." + gen_format);
        if (gen_format == "bin") {
          write_bin(path, s);
        } else {
          write_txt(path, s);
        }
        files.push_back(path.filename().string());
      };
      if (gen_packed) {
        emit("stream", stream.next_sequence(gen_n * gen_m));
      } else {
        for (std::size_t j = 0; j < gen_m; ++j) {
          char stem[32];
          std::snprintf(stem, sizeof stem, "seq_%06zu", j + 1);
          emit(stem, stream.next_sequence(gen_n));
        }
      }
      json manifest = {{"config", config}, {"files", files}};
      detail::write_text(fs::path(gen_out) / "manifest.json", manifest.dump(2) + "\n");
      out << manifest.dump(2) << "\n";
      return kOk;
    }

    if (*run) {
      std::optional<MatrixFormat> format;
      if (run_format == "csv") format = MatrixFormat::Csv;
      if (run_format == "bin") format = MatrixFormat::Binary;
      SequenceSource source;
      std::size_t m = 0, n = 0;
      json source_info;
      std::optional<BitStream> stream;
      std::vector<BitSequence> loaded;
      if (!run_inputs.empty()) {
        if (run_m != 0 || run_n != 0) {
          throw Error(ErrorCode::InvalidParams, "--input cannot be combined with --n/--m");
        }
        json names = json::array();
        for (auto& path : run_inputs) {
          try {
            loaded.push_back(read_sequence(path));
          } catch (const Error& e) {
            throw e.with_context(path);
          }
          if (loaded.back().size() != loaded.front().size()) {
            throw Error(ErrorCode::LengthMismatch, path + " has " + std::to_string(loaded.back().size()) +
                                                       " bits, expected " + std::to_string(loaded.front().size()));
          }
          names.push_back(fs::path(path).filename().string());
        }
        m = loaded.size();
        n = loaded.front().size();
        source_info = {{"type", "files"}, {"files", names}};
        source = [&](std::size_t j) { return loaded[j]; };
      } else {
        if (run_m == 0 || run_n == 0) throw Error(ErrorCode::InvalidParams, "need --n and --m, or --input");
        m = run_m;
        n = run_n;
        const auto spec = run_gen.spec();
        source_info = run_gen.to_json();
        stream.emplace(spec, static_cast<std::uint64_t>(spec.sequence_index) * n);
        source = [&](std::size_t) { return stream->next_sequence(n); };
      }
      const auto params = run_params.apply(n);
      for (auto& w : params.warnings()) err << "warning: " << w << "\n";
      compute_matrix_to_file(run_out, m, source, params, workers, source_info, format);
      out << "wrote " << run_out << ": " << m << " x " << kBatterySize << " p-values (n=" << n << ")\n";
      return kOk;
    }

    if (*analyze) {
      const auto mat = load_matrix(an_matrix);
      ActiveSet active = an_items.empty() ? detail::matrix_items(mat)
                                          : parse_item_list(stsdep::detail::slurp(an_items));
      const auto q = an_scramble ? scrambled_q(mat, active) : q_stat(mat, active);
      const auto h = histogram(q, an_bins);
      if (h.m < 2) throw Error(ErrorCode::DegenerateSample, "need at least 2 sequences");
      json config = {{"command", "analyze"}, {"matrix", an_matrix}, {"scramble", an_scramble},
                     {"bins", an_bins}, {"items", an_items.empty() ? json(nullptr) : json(an_items)},
                     {"matrix_provenance", mat.provenance()}};
      if (!an_out.empty()) {
        detail::write_text(an_out, an_format == "json" ? histogram_json(h, config).dump(2) + "\n"
                                                       : histogram_csv(h, config));
      }
      out << "mode " << to_string(h.mode) << "  m " << h.m << "  k " << h.k << "  mean "
          << detail::fmt(h.mean) << "  sd " << detail::fmt(h.sd, "%.6g") << "  theoretical_sd "
          << detail::fmt(h.theoretical_sd, "%.6g") << "\n";
      out << "I = " << detail::fmt(h.I) << "\n";
      return kOk;
    }

    if (*minset) {
      const auto mat = load_matrix(ms_matrix);
      StopRule stop;
      stop.delta = ms_delta;
      stop.k_min = ms_kmin;
      stop.kind = ms_stop == "full" ? StopRule::Kind::Full
                  : ms_stop == "threshold" ? StopRule::Kind::Threshold
                                           : StopRule::Kind::KMin;
      const auto t = greedy_run(mat, stop);
      json config = {{"command", "minset"}, {"matrix", ms_matrix}, {"stop", ms_stop}, {"delta", ms_delta},
                     {"k_min", ms_kmin}, {"last", ms_last}, {"matrix_provenance", mat.provenance()}};
      const std::string ext = ms_format == "json" ? ".json" : ".csv";
      detail::write_text(ms_out + "_trajectory" + ext, ms_format == "json"
                                                          ? trajectory_json(t, config).dump(2) + "\n"
                                                          : trajectory_csv(t, config));
      out << "initial k " << t.initial.size() << "  I = " << detail::fmt(t.initial_I) << "\n";
      out << "steps " << t.steps.size() << "\n";
      if (auto sel = t.selected_set()) {
        detail::write_text(ms_out + "_selected.txt", item_list(*sel));
        out << "selected: " << *t.selected_removals << " removed, k " << sel->size() << " (I <= "
            << detail::fmt(1 + ms_delta, "%g") << ")\n";
      } else {
        out << "selected: none (I never reached " << detail::fmt(1 + ms_delta, "%g") << ")\n";
      }
      if (ms_last > 0 && ms_last <= t.initial.size() && t.initial.size() - ms_last <= t.steps.size()) {
        detail::write_text(ms_out + "_last" + std::to_string(ms_last) + ".txt",
                           item_list(t.last_survivors(ms_last)));
      }
      return kOk;
    }

    if (*overlap) {
      const auto a = parse_item_list(stsdep::detail::slurp(ov_a));
      const auto b = parse_item_list(stsdep::detail::slurp(ov_b));
      const auto st = overlap_stats(a, b, ov_universe);
      const double z = st.sd > 0 ? (static_cast<double>(st.observed) - st.expected) / st.sd : 0.0;
      out << "K " << a.size() << "  N " << ov_universe << "\n";
      out << "observed " << st.observed << "\n";
      out << "expected " << detail::fmt(st.expected, "%.4f") << "\n";
      out << "sd " << detail::fmt(st.sd, "%.4f") << "\n";
      out << "z " << detail::fmt(z, "%.4f") << "\n";
      return kOk;
    }

    if (*report) {
      std::vector<PValueMatrix> mats;
      std::vector<TaggedMatrix> tagged;
      json sources = json::array();
      for (auto& path : rp_matrices) mats.push_back(load_matrix(path));
      for (std::size_t i = 0; i < mats.size(); ++i) {
        const auto& prov = mats[i].provenance();
        if (!prov.contains("n") || !prov["n"].is_number_unsigned()) {
          throw Error(ErrorCode::FormatError, rp_matrices[i] + ": provenance has no sequence length n");
        }
        tagged.push_back({prov["n"].get<std::size_t>(), &mats[i]});
        sources.push_back({{"matrix", rp_matrices[i]}, {"provenance", prov}});
      }
      const auto rows = sd_scaling_report(tagged);
      json config = {{"command", "report"}, {"matrices", sources}};
      if (!rp_out.empty()) {
        detail::write_text(rp_out, rp_format == "json" ? scaling_json(rows, config).dump(2) + "\n"
                                                       : scaling_csv(rows, config));
      }
      out << "n,m,k,mode,sample_sd,theoretical_sd,I\n";
      for (auto& r : rows) {
        out << r.n << "," << r.m << "," << r.k << "," << to_string(r.mode) << ","
            << detail::fmt(r.sample_sd, "%.6g") << "," << detail::fmt(r.theoretical_sd, "%.6g") << ","
            << detail::fmt(r.I) << "\n";
      }
      return kOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error: IoError: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}

}  // namespace stsdep::cli

#endif  // STSDEP_CLI_HPP_
