// zport command-line tool: converts instrument S-parameter files to
// Z-parameter sweeps, extracts transfer functions and resonance modes,
// fits the series-R parallel-LC equivalent circuit, and prints readout
// noise budgets.
//
// Exit codes: 0 success, 2 parse or parameter error, 3 singular parameter
// conversion, 4 vanishing Z11, 5 degenerate sweep, 1 unexpected failure.
// Every failure prints a single "ERROR <code>: ..." line on stderr.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "zport/zport.hpp"

namespace fs = std::filesystem;
using zport::Json;

namespace {

struct CliError {
  int code;
  std::string message;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError{2, "cannot read '" + path.string() + "'"};
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void write_output(const std::optional<std::string>& path, const std::string& text) {
  if (!path || *path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(*path, std::ios::binary);
  if (!out) throw CliError{2, "cannot write '" + *path + "'"};
  out << text;
}

std::vector<double> parse_double_list(const std::string& text, std::size_t expected,
                                      const std::string& flag) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string cell =
        text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    double v = 0.0;
    if (!zport::detail::parse_double(cell, v))
      throw CliError{2, flag + ": malformed number '" + cell + "'"};
    values.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (expected != 0 && values.size() != expected)
    throw CliError{2, flag + ": expected " + std::to_string(expected) + " comma-separated values"};
  return values;
}

// Single JSON file with AnalysisConfig defaults; command-line flags win.
struct AnalysisConfig {
  std::optional<double> z_ref;
  std::optional<double> temperature;
  std::optional<std::string> opamp;
  std::optional<double> r1;
  std::optional<double> r2;
  std::optional<double> prominence_db;
  std::optional<std::string> output_format;
};

AnalysisConfig load_config(const std::string& path) {
  AnalysisConfig cfg;
  Json doc;
  try {
    doc = Json::parse(read_file(path));
  } catch (const Json::exception& e) {
    throw CliError{2, "config: " + std::string(e.what())};
  }
  if (!doc.is_object()) throw CliError{2, "config: expected a JSON object"};
  for (const auto& item : doc.items()) {
    const std::string& key = item.key();
    const Json& value = item.value();
    auto number = [&]() -> double {
      if (!value.is_number()) throw CliError{2, "config: '" + key + "' must be a number"};
      return value.get<double>();
    };
    auto text = [&]() -> std::string {
      if (!value.is_string()) throw CliError{2, "config: '" + key + "' must be a string"};
      return value.get<std::string>();
    };
    if (key == "z_ref") {
      cfg.z_ref = number();
    } else if (key == "temperature") {
      cfg.temperature = number();
    } else if (key == "opamp") {
      cfg.opamp = text();
    } else if (key == "r1") {
      cfg.r1 = number();
    } else if (key == "r2") {
      cfg.r2 = number();
    } else if (key == "prominence_db") {
      cfg.prominence_db = number();
    } else if (key == "output_format") {
      const std::string fmt = text();
      if (fmt != "csv" && fmt != "json")
        throw CliError{2, "config: output_format must be 'csv' or 'json'"};
      cfg.output_format = fmt;
    } else {
      throw CliError{2, "config: unknown key '" + key + "'"};
    }
  }
  if (cfg.opamp && !zport::find_opamp_preset(*cfg.opamp))
    throw CliError{2, "config: unknown op-amp preset '" + *cfg.opamp + "'"};
  return cfg;
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// convert

struct ConvertArgs {
  std::string input;
  std::optional<std::string> output;
  std::string format = "csv";
  std::optional<double> z_ref;
  bool z_normalized = false;
};

zport::TwoPortNetwork load_z_network(const std::string& text, std::optional<double> z_ref,
                                     bool z_normalized) {
  if (text.rfind(zport::kZSweepCsvHeader, 0) == 0)
    return zport::parse_z_csv(text, z_ref.value_or(zport::kDefaultReferenceOhm));
  auto data = zport::parse_touchstone(text, zport::TouchstoneParsePolicy{z_normalized});
  zport::TwoPortNetwork net = data.network;
  if (z_ref && *z_ref != net.z_ref())
    net = zport::TwoPortNetwork(net.kind(), net.grid(), net.matrices(), *z_ref);
  if (net.kind() == zport::ParamKind::S) return zport::s_to_z(net);
  return net;
}

std::string render_z(const zport::TwoPortNetwork& z_net, const std::string& format) {
  if (format == "json") return dump(zport::z_sweep_json(z_net));
  return zport::export_z_csv(z_net);
}

void convert_one(const fs::path& in_path, const std::optional<std::string>& out_path,
                 const ConvertArgs& args) {
  const auto z_net = load_z_network(read_file(in_path), args.z_ref, args.z_normalized);
  write_output(out_path, render_z(z_net, args.format));
}

int run_convert(const ConvertArgs& args) {
  if (fs::is_directory(args.input)) {
    if (!args.output)
      throw CliError{2, "directory input requires -o OUTPUT_DIR"};
    const fs::path out_dir(*args.output);
    fs::create_directories(out_dir);
    std::vector<fs::path> inputs;
    for (const auto& entry : fs::directory_iterator(args.input)) {
      if (!entry.is_regular_file()) continue;
      std::string ext = entry.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(),
                     [](unsigned char c) { return std::tolower(c); });
      if (ext == ".s2p") inputs.push_back(entry.path());
    }
    std::sort(inputs.begin(), inputs.end());
    if (inputs.empty()) throw CliError{2, "no .s2p files in '" + args.input + "'"};

    const std::string ext = args.format == "json" ? ".json" : ".csv";
    std::vector<std::future<std::optional<CliError>>> tasks;
    tasks.reserve(inputs.size());
    for (const fs::path& in_path : inputs) {
      tasks.push_back(std::async(std::launch::async, [&, in_path]() -> std::optional<CliError> {
        try {
          const fs::path out = out_dir / (in_path.stem().string() + ext);
          convert_one(in_path, out.string(), args);
          return std::nullopt;
        } catch (const CliError& e) {
          return CliError{e.code, in_path.string() + ": " + e.message};
        } catch (const zport::SingularConversion& e) {
          return CliError{3, in_path.string() + ": " + e.what()};
        } catch (const std::exception& e) {
          return CliError{2, in_path.string() + ": " + e.what()};
        }
      }));
    }
    std::optional<CliError> first;
    for (auto& task : tasks) {
      auto err = task.get();
      if (err && !first) first = err;
    }
    if (first) throw *first;
    return 0;
  }
  convert_one(args.input, args.output, args);
  return 0;
}

// ---------------------------------------------------------------------------
// tf

struct TfArgs {
  std::string input;
  std::optional<std::string> output;       // modes report JSON
  std::optional<std::string> tf_csv;       // response samples
  double prominence_db = 6.0;
  std::optional<std::string> sidebands;    // "FC,FM"
  std::string sideband_source = "auto";    // auto | fitted | grid
  std::optional<double> z_ref;
  bool z_normalized = false;
};

int run_tf(const TfArgs& args) {
  const auto z_net = load_z_network(read_file(args.input), args.z_ref, args.z_normalized);
  const zport::TransferFunction tf = zport::h_open_circuit(z_net);
  if (args.tf_csv) write_output(args.tf_csv, zport::export_tf_csv(tf));

  const auto peaks = zport::detect_resonances(tf, args.prominence_db);
  const auto modes = zport::fit_resonance_sum(tf, peaks);

  Json report;
  report["modes"] = zport::resonance_report_json(peaks, modes);
  if (args.sidebands) {
    const auto fc_fm = parse_double_list(*args.sidebands, 2, "--sidebands");
    std::string source = args.sideband_source;
    if (source == "auto") source = modes.empty() ? "grid" : "fitted";
    zport::AmResponse am;
    if (source == "fitted") {
      if (modes.empty()) throw CliError{2, "--sideband-source fitted: no fitted modes"};
      am = zport::am_response(modes, fc_fm[0], fc_fm[1]);
    } else if (source == "grid") {
      am = zport::am_response(tf, fc_fm[0], fc_fm[1]);
    } else {
      throw CliError{2, "--sideband-source must be auto, fitted, or grid"};
    }
    report["am_response"] = zport::am_response_json(am, source);
  }
  write_output(args.output, dump(report));
  return 0;
}

// ---------------------------------------------------------------------------
// fit-lcr

struct FitLcrArgs {
  std::string input;
  std::optional<std::string> output;
};

int run_fit_lcr(const FitLcrArgs& args) {
  const zport::ImpedanceSweep sweep = zport::parse_impedance_csv(read_file(args.input));
  const zport::LcrFitResult fit = zport::fit_lcr(sweep);
  write_output(args.output, dump(zport::lcr_fit_report_json(fit)));
  return 0;
}

// ---------------------------------------------------------------------------
// noise

struct NoiseArgs {
  std::optional<std::string> contrib;
  std::optional<std::string> opamp;
  std::optional<double> e_n;
  std::optional<double> i_n;
  std::optional<double> r1;
  std::optional<double> r2;
  std::optional<std::string> zsen;  // "RE,IM"
  std::optional<double> zsen_mag;
  double temperature = zport::kDefaultTemperatureK;
  double freq_hz = 0.0;
  std::optional<std::string> presets_path;
  std::optional<std::string> output;
};

zport::OpAmpNoiseSpec resolve_opamp(const NoiseArgs& args) {
  if (args.e_n || args.i_n) {
    if (!(args.e_n && args.i_n))
      throw CliError{2, "--en and --in must be given together"};
    return {"inline", *args.e_n, *args.i_n};
  }
  if (!args.opamp) throw CliError{2, "missing op-amp: use --opamp or --en/--in"};
  if (args.presets_path) {
    const auto specs = zport::load_opamp_presets_json(read_file(*args.presets_path));
    for (const auto& spec : specs)
      if (zport::iequals(spec.name, *args.opamp)) return spec;
  }
  const zport::OpAmpPresetEntry* preset = zport::find_opamp_preset(*args.opamp);
  if (!preset) throw CliError{2, "unknown op-amp preset '" + *args.opamp + "'"};
  if (!preset->spec)
    throw CliError{2, "preset '" + preset->name +
                          "' has no noise densities; supply --en/--in or a --presets file"};
  return *preset->spec;
}

int run_noise(const NoiseArgs& args) {
  if (args.contrib) {
    const auto values = parse_double_list(*args.contrib, 0, "--contrib");
    Json report;
    report["contributions_v_rthz"] = values;
    report["quadrature_total_v_rthz"] =
        zport::quadrature_total(std::span<const double>(values.data(), values.size()));
    write_output(args.output, dump(report));
    return 0;
  }

  const zport::OpAmpNoiseSpec amp = resolve_opamp(args);
  if (!args.r1 || !args.r2) throw CliError{2, "missing --r1/--r2 resistor values"};
  if (args.zsen && args.zsen_mag)
    throw CliError{2, "--zsen and --zsen-mag are mutually exclusive"};
  if (!args.zsen && !args.zsen_mag)
    throw CliError{2, "missing sensor impedance: use --zsen RE,IM or --zsen-mag OHM"};

  zport::SensorOutputImpedance z_sen;
  if (args.zsen) {
    const auto re_im = parse_double_list(*args.zsen, 2, "--zsen");
    z_sen = zport::SensorOutputImpedance{zport::Complex(re_im[0], re_im[1])};
  } else {
    z_sen = zport::SensorOutputImpedance::from_magnitude(*args.zsen_mag);
  }

  const zport::ReadoutCircuit circuit{*args.r1, *args.r2, args.temperature};
  const zport::NoiseBudget budget = zport::noise_psd(circuit, amp, z_sen, args.freq_hz);

  Json report;
  report["opamp"] = amp.name;
  report["gain_av"] = budget.av;
  report["thermal_lower_bound"] = budget.thermal_lower_bound;
  report["budget"] = zport::noise_budget_json(budget);
  report["dominance"] = zport::dominance_json(zport::dominance_report(budget));
  write_output(args.output, dump(report));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-port impedance modeling toolkit for resonant sensor readouts"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON file with analysis defaults");

  ConvertArgs convert_args;
  double convert_z_ref = 0.0;
  CLI::App* convert = app.add_subcommand(
      "convert", "Convert a Touchstone .s2p file (or directory) to a Z-parameter sweep");
  convert->add_option("input", convert_args.input, "Input .s2p file or directory")->required();
  std::string convert_output;
  CLI::Option* convert_output_opt =
      convert->add_option("-o,--output", convert_output, "Output file or directory");
  CLI::Option* convert_format_opt =
      convert->add_option("--format", convert_args.format, "Output format: csv or json")
          ->check(CLI::IsMember({"csv", "json"}));
  CLI::Option* convert_zref_opt =
      convert->add_option("--z-ref", convert_z_ref, "Override the reference impedance in ohms");
  convert->add_flag("--z-normalized", convert_args.z_normalized,
                    "Treat Z-format Touchstone data as z_ref-normalized");

  TfArgs tf_args;
  double tf_z_ref = 0.0;
  CLI::App* tf = app.add_subcommand(
      "tf", "Open-circuit transfer function and resonance modes from a network");
  tf->add_option("input", tf_args.input, "Input .s2p file or Z-sweep CSV")->required();
  std::string tf_output;
  CLI::Option* tf_output_opt =
      tf->add_option("-o,--output", tf_output, "Mode report JSON path (default stdout)");
  std::string tf_csv_path;
  CLI::Option* tf_csv_opt =
      tf->add_option("--tf-csv", tf_csv_path, "Write the response samples as CSV");
  CLI::Option* tf_prom_opt = tf->add_option("--prominence-db", tf_args.prominence_db,
                                            "Peak prominence over the median, in dB");
  std::string tf_sidebands;
  CLI::Option* tf_sidebands_opt = tf->add_option(
      "--sidebands", tf_sidebands, "Evaluate carrier and sidebands: FC,FM in Hz");
  tf->add_option("--sideband-source", tf_args.sideband_source,
                 "Evaluation source: auto, fitted, or grid")
      ->check(CLI::IsMember({"auto", "fitted", "grid"}));
  CLI::Option* tf_zref_opt =
      tf->add_option("--z-ref", tf_z_ref, "Override the reference impedance in ohms");
  tf->add_flag("--z-normalized", tf_args.z_normalized,
               "Treat Z-format Touchstone data as z_ref-normalized");

  FitLcrArgs fit_args;
  CLI::App* fit = app.add_subcommand(
      "fit-lcr", "Fit the series-R parallel-LC equivalent circuit to an impedance sweep");
  fit->add_option("input", fit_args.input, "Impedance CSV (freq_hz,z_re,z_im or Z-sweep)")
      ->required();
  std::string fit_output;
  CLI::Option* fit_output_opt =
      fit->add_option("-o,--output", fit_output, "Fit report JSON path (default stdout)");

  NoiseArgs noise_args;
  CLI::App* noise = app.add_subcommand("noise", "Output-referred noise budget of the readout");
  std::string noise_contrib;
  CLI::Option* noise_contrib_opt = noise->add_option(
      "--contrib", noise_contrib, "Quadrature-combine ASD contributions: A,B,C in V/rtHz");
  std::string noise_opamp;
  CLI::Option* noise_opamp_opt =
      noise->add_option("--opamp", noise_opamp, "Op-amp preset name (e.g. LT1363)");
  double noise_en = 0.0, noise_in = 0.0;
  CLI::Option* noise_en_opt =
      noise->add_option("--en", noise_en, "Op-amp voltage noise ASD in V/rtHz");
  CLI::Option* noise_in_opt =
      noise->add_option("--in", noise_in, "Op-amp current noise ASD in A/rtHz");
  double noise_r1 = 0.0, noise_r2 = 0.0;
  CLI::Option* noise_r1_opt = noise->add_option("--r1", noise_r1, "Feedback resistor R1 in ohms");
  CLI::Option* noise_r2_opt = noise->add_option("--r2", noise_r2, "Feedback resistor R2 in ohms");
  std::string noise_zsen;
  CLI::Option* noise_zsen_opt =
      noise->add_option("--zsen", noise_zsen, "Sensor output impedance: RE,IM in ohms");
  double noise_zsen_mag = 0.0;
  CLI::Option* noise_zsen_mag_opt = noise->add_option(
      "--zsen-mag", noise_zsen_mag, "Sensor impedance magnitude in ohms (Re treated as 0)");
  CLI::Option* noise_temp_opt =
      noise->add_option("--temp", noise_args.temperature, "Temperature in kelvin");
  noise->add_option("--freq", noise_args.freq_hz, "Evaluation frequency label in Hz");
  std::string noise_presets;
  CLI::Option* noise_presets_opt =
      noise->add_option("--presets", noise_presets, "Op-amp preset JSON file");
  std::string noise_output;
  CLI::Option* noise_output_opt =
      noise->add_option("-o,--output", noise_output, "Budget report JSON path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "ERROR 2: " << e.what() << '\n';
    return 2;
  }

  try {
    AnalysisConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);

    if (convert->parsed()) {
      if (convert_output_opt->count() > 0) convert_args.output = convert_output;
      if (convert_zref_opt->count() > 0)
        convert_args.z_ref = convert_z_ref;
      else if (cfg.z_ref)
        convert_args.z_ref = *cfg.z_ref;
      if (convert_format_opt->count() == 0 && cfg.output_format)
        convert_args.format = *cfg.output_format;
      return run_convert(convert_args);
    }
    if (tf->parsed()) {
      if (tf_output_opt->count() > 0) tf_args.output = tf_output;
      if (tf_csv_opt->count() > 0) tf_args.tf_csv = tf_csv_path;
      if (tf_sidebands_opt->count() > 0) tf_args.sidebands = tf_sidebands;
      if (tf_zref_opt->count() > 0)
        tf_args.z_ref = tf_z_ref;
      else if (cfg.z_ref)
        tf_args.z_ref = *cfg.z_ref;
      if (tf_prom_opt->count() == 0 && cfg.prominence_db)
        tf_args.prominence_db = *cfg.prominence_db;
      return run_tf(tf_args);
    }
    if (fit->parsed()) {
      if (fit_output_opt->count() > 0) fit_args.output = fit_output;
      return run_fit_lcr(fit_args);
    }
    if (noise->parsed()) {
      if (noise_contrib_opt->count() > 0) noise_args.contrib = noise_contrib;
      if (noise_opamp_opt->count() > 0)
        noise_args.opamp = noise_opamp;
      else if (cfg.opamp)
        noise_args.opamp = *cfg.opamp;
      if (noise_en_opt->count() > 0) noise_args.e_n = noise_en;
      if (noise_in_opt->count() > 0) noise_args.i_n = noise_in;
      if (noise_r1_opt->count() > 0)
        noise_args.r1 = noise_r1;
      else if (cfg.r1)
        noise_args.r1 = *cfg.r1;
      if (noise_r2_opt->count() > 0)
        noise_args.r2 = noise_r2;
      else if (cfg.r2)
        noise_args.r2 = *cfg.r2;
      if (noise_zsen_opt->count() > 0) noise_args.zsen = noise_zsen;
      if (noise_zsen_mag_opt->count() > 0) noise_args.zsen_mag = noise_zsen_mag;
      if (noise_temp_opt->count() == 0 && cfg.temperature)
        noise_args.temperature = *cfg.temperature;
      if (noise_presets_opt->count() > 0) noise_args.presets_path = noise_presets;
      if (noise_output_opt->count() > 0) noise_args.output = noise_output;
      return run_noise(noise_args);
    }
    return 2;
  } catch (const CliError& e) {
    std::cerr << "ERROR " << e.code << ": " << e.message << '\n';
    return e.code;
  } catch (const zport::SingularConversion& e) {
    std::cerr << "ERROR 3: " << e.what() << '\n';
    return 3;
  } catch (const zport::DivisionByZero& e) {
    std::cerr << "ERROR 4: " << e.what() << '\n';
    return 4;
  } catch (const zport::DegenerateSweep& e) {
    std::cerr << "ERROR 5: " << e.what() << '\n';
    return 5;
  } catch (const zport::Error& e) {
    std::cerr << "ERROR 2: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "ERROR 2: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "ERROR 1: " << e.what() << '\n';
    return 1;
  }
}
