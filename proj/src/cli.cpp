#include "aicp/cli.hpp"

#include <cctype>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "aicp/metric_learn.hpp"
#include "aicp/netsim.hpp"
#include "aicp/scenario.hpp"
#include "aicp/sorting.hpp"
#include "aicp/vdu.hpp"

namespace aicp {

namespace {

std::vector<std::uint8_t> parse_hex(const std::string& text) {
    std::vector<std::uint8_t> bytes;
    std::string pair;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        if (!std::isxdigit(static_cast<unsigned char>(c))) {
            throw std::runtime_error(std::string("invalid hex character '") +
                                     c + "'");
        }
        pair.push_back(c);
        if (pair.size() == 2) {
            bytes.push_back(
                static_cast<std::uint8_t>(std::stoul(pair, nullptr, 16)));
            pair.clear();
        }
    }
    if (!pair.empty()) {
        throw std::runtime_error("odd number of hex digits");
    }
    return bytes;
}

void print_hex(std::ostream& out, const std::vector<std::uint8_t>& bytes) {
    char buf[4];
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%02x", bytes[i]);
        out << buf;
        out << ((i % 16 == 15 || i + 1 == bytes.size()) ? '\n' : ' ');
    }
}

std::vector<double> split_numeric_row(const std::string& line, int line_no,
                                      const std::string& origin) {
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            std::size_t used = 0;
            fields.push_back(std::stod(cell, &used));
            while (used < cell.size() &&
                   std::isspace(static_cast<unsigned char>(cell[used]))) {
                ++used;
            }
            if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                                     ": not a number: '" + cell + "'");
        }
    }
    return fields;
}

bool looks_like_header(const std::string& line) {
    for (char c : line) {
        if (std::isalpha(static_cast<unsigned char>(c))) return true;
    }
    return false;
}

// Rows are d,v,r,c with an optional trailing label column and optional
// header line.
template <typename RowHandler>
void for_each_csv_row(std::istream& in, const std::string& origin,
                      std::size_t columns, RowHandler&& handler) {
    std::string line;
    int line_no = 0;
    bool first_content = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.find_first_not_of(" \t\r") ==
                                std::string::npos) {
            continue;
        }
        if (first_content && looks_like_header(line)) {
            first_content = false;
            continue;
        }
        first_content = false;
        const auto fields = split_numeric_row(line, line_no, origin);
        if (fields.size() != columns) {
            throw std::runtime_error(
                origin + ":" + std::to_string(line_no) + ": expected " +
                std::to_string(columns) + " fields, got " +
                std::to_string(fields.size()));
        }
        handler(fields, line_no);
    }
}

std::vector<FeatureTuple> load_feature_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<FeatureTuple> tuples;
    for_each_csv_row(in, path, 4,
                     [&tuples](const std::vector<double>& f, int) {
                         tuples.push_back(FeatureTuple{f[0], f[1], f[2], f[3]});
                     });
    return tuples;
}

LabeledDataset load_labeled_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    LabeledDataset data;
    for_each_csv_row(
        in, path, 5, [&data, &path](const std::vector<double>& f, int line) {
            if (f[4] != 0.0 && f[4] != 1.0) {
                throw std::runtime_error(path + ":" + std::to_string(line) +
                                         ": label must be 0 or 1");
            }
            data.push_back(LabeledTuple{FeatureTuple{f[0], f[1], f[2], f[3]},
                                        static_cast<int>(f[4])});
        });
    return data;
}

void write_text_file(const std::string& path, const std::string& content) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::filesystem::create_directories(p.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << content;
    if (!out.good()) throw std::runtime_error("write to " + path + " failed");
}

int cmd_simulate(const std::string& scenario_path,
                 const std::vector<std::string>& filter_override,
                 bool seed_given, std::uint64_t seed, std::ostream& out) {
    Scenario sc = load_scenario_file(scenario_path);
    if (seed_given) sc.config.seed = seed;
    if (!filter_override.empty()) {
        sc.filters.clear();
        for (const std::string& name : filter_override) {
            sc.filters.push_back(filter_from_name(name));
        }
    }

    out << "scenario: " << scenario_path << " (" << sc.config.vehicle_count
        << " vehicles, " << sc.config.duration_s << " s, seed "
        << sc.config.seed << ")\n";
    out << "filter    mean_received  mean_busy_s  mean_loss_ratio  "
           "mean_generated\n";
    char row[160];
    for (FilterType f : sc.filters) {
        SimConfig cfg = sc.config;
        cfg.filter = f;
        const SimMetrics metrics = run_simulation(cfg);

        std::ostringstream metrics_csv;
        metrics.write_metrics_csv(metrics_csv);
        write_text_file(resolve_output_path(sc.metrics_csv, f),
                        metrics_csv.str());

        std::ostringstream cdf_csv;
        metrics.write_cdf_csv(cdf_csv);
        write_text_file(resolve_output_path(sc.cdf_csv, f), cdf_csv.str());

        std::snprintf(row, sizeof(row), "%-8s  %13.2f  %11.6f  %15.4f  %14.2f\n",
                      filter_name(f), metrics.mean_received(),
                      metrics.mean_busy_s(), metrics.mean_loss_ratio(),
                      metrics.mean_generated());
        out << row;
    }
    return 0;
}

int cmd_train(std::size_t synthetic, const std::string& data_path,
              const std::string& out_path, const LearnConfig& cfg,
              double holdout, std::ostream& out) {
    LabeledDataset data = data_path.empty()
                              ? make_synthetic_dataset(synthetic, cfg.seed)
                              : load_labeled_csv(data_path);
    const TrainResult result = train_with_holdout(data, cfg, holdout);
    save_matrix_file(out_path, result.matrix);

    char buf[128];
    out << "trained on " << result.train_count << " tuples, holdout "
        << result.holdout_count << "\n";
    std::snprintf(buf, sizeof(buf), "objective: %.6f\n", result.objective);
    out << buf;
    std::snprintf(buf, sizeof(buf), "holdout accuracy: %.4f\n",
                  result.holdout_accuracy);
    out << buf;
    out << "wrote matrix to " << out_path << "\n";
    return 0;
}

int cmd_rank(const std::string& data_path, const std::string& matrix_path,
             std::size_t top, const std::string& algo, std::ostream& out) {
    const FitnessMatrix fm = load_matrix_file(matrix_path);
    const std::vector<FeatureTuple> tuples = load_feature_csv(data_path);

    char buf[160];
    const auto t0 = std::chrono::steady_clock::now();
    if (algo == "radix") {
        std::vector<QuantizedTuple> quantized;
        quantized.reserve(tuples.size());
        for (const FeatureTuple& t : tuples) {
            quantized.push_back(QuantizedTuple::quantize(t, fm.normalization));
        }
        const std::vector<std::size_t> order = radix_sort_indices(quantized);
        const auto t1 = std::chrono::steady_clock::now();

        out << "rank  keys(D:V:R:C)            d        v        r      c\n";
        for (std::size_t i = 0; i < order.size() && i < top; ++i) {
            const std::size_t idx = order[i];
            const auto& k = quantized[idx].keys;
            const FeatureTuple& t = tuples[idx];
            std::snprintf(buf, sizeof(buf),
                          "%-4zu  %5u:%5u:%5u:%5u  %8.2f %8.2f %8.2f %6.1f\n",
                          i + 1, k[0], k[1], k[2], k[3], t.d, t.v, t.r, t.c);
            out << buf;
        }
        std::snprintf(buf, sizeof(buf), "ranked %zu tuples in %.3f ms\n",
                      tuples.size(),
                      std::chrono::duration<double, std::milli>(t1 - t0)
                          .count());
        out << buf;
    } else if (algo == "fitness") {
        const std::vector<ScoredTuple> ranked =
            weighted_fitness_sort(tuples, fm);
        const auto t1 = std::chrono::steady_clock::now();

        out << "rank  score         d        v        r      c\n";
        for (std::size_t i = 0; i < ranked.size() && i < top; ++i) {
            const ScoredTuple& s = ranked[i];
            std::snprintf(buf, sizeof(buf),
                          "%-4zu  %.6f  %8.2f %8.2f %8.2f %6.1f\n", i + 1,
                          s.score, s.features.d, s.features.v, s.features.r,
                          s.features.c);
            out << buf;
        }
        std::snprintf(buf, sizeof(buf), "ranked %zu tuples in %.3f ms\n",
                      tuples.size(),
                      std::chrono::duration<double, std::milli>(t1 - t0)
                          .count());
        out << buf;
    } else {
        throw std::runtime_error("unknown algorithm '" + algo +
                                 "' (expected fitness or radix)");
    }
    return 0;
}

DetectedObject parse_object_spec(const std::string& spec) {
    const auto fields = split_numeric_row(spec, 1, "--object");
    if (fields.size() != 7) {
        throw std::runtime_error(
            "--object needs id,px,py,velocity,distance,label,confidence");
    }
    DetectedObject o;
    o.id = static_cast<std::uint16_t>(fields[0]);
    o.position_x = static_cast<std::uint8_t>(fields[1]);
    o.position_y = static_cast<std::uint8_t>(fields[2]);
    o.velocity = static_cast<std::uint8_t>(fields[3]);
    o.distance = static_cast<std::uint8_t>(fields[4]);
    o.label = static_cast<std::uint8_t>(fields[5]);
    o.confidence = static_cast<std::uint8_t>(fields[6]);
    return o;
}

void print_packet(std::ostream& out, const CmrPacket& p) {
    char buf[160];
    out << "ttl: " << int(p.ttl) << "\n";
    out << "type: "
        << (p.payload.msg_type == MessageType::Safety ? "safety" : "nonsafety")
        << "\n";
    std::snprintf(buf, sizeof(buf), "timestamp: %u (%.1f s)\n",
                  p.payload.timestamp, p.payload.timestamp / 10.0);
    out << buf;
    std::snprintf(buf, sizeof(buf), "gps: %.5f, %.5f\n", p.payload.lat_deg(),
                  p.payload.lon_deg());
    out << buf;
    std::snprintf(buf, sizeof(buf), "imu: %.2f m/s, heading %.2f deg, category %u\n",
                  p.payload.imu.velocity_mps(), p.payload.imu.direction_deg(),
                  p.payload.imu.category);
    out << buf;
    out << "objects: " << p.payload.objects.size() << "\n";
    for (std::size_t i = 0; i < p.payload.objects.size(); ++i) {
        const DetectedObject& o = p.payload.objects[i];
        const char* label = is_valid_category(o.label)
                                ? category_name(static_cast<CategoryCode>(o.label))
                                : "unknown";
        std::snprintf(buf, sizeof(buf),
                      "  [%zu] id=%u pos=(%u,%u) velocity=%.1f m/s "
                      "distance=%.0f m label=%s confidence=%.2f\n",
                      i, o.id, o.position_x, o.position_y, o.velocity_mps(),
                      o.distance_m(), label, o.confidence_unit());
        out << buf;
    }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
    CLI::App app{"cooperative perception filtering toolkit"};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("simulate",
                                   "run the V2V broadcast simulation");
    std::string scenario_path;
    std::vector<std::string> filter_override;
    std::uint64_t seed_override = 0;
    sim->add_option("--scenario", scenario_path, "scenario JSON file")
        ->required();
    auto* seed_opt =
        sim->add_option("--seed", seed_override, "override the scenario seed");
    sim->add_option("--filter", filter_override,
                    "filters to run (cmr, hopdis, hop); repeatable");

    auto* train = app.add_subcommand("train", "fit a fitness matrix");
    std::size_t synthetic = 0;
    std::string train_data;
    std::string matrix_out;
    LearnConfig learn_cfg;
    double holdout = 0.2;
    auto* syn_opt = train->add_option("--synthetic", synthetic,
                                      "generate N synthetic labeled tuples");
    auto* data_opt = train->add_option("--data", train_data,
                                       "labeled CSV (d,v,r,c,label)");
    syn_opt->excludes(data_opt);
    train->add_option("--out", matrix_out, "matrix file to write")->required();
    train->add_option("--seed", learn_cfg.seed, "RNG seed");
    train->add_option("--iterations", learn_cfg.iterations, "ascent steps");
    train->add_option("--step-size", learn_cfg.step_size, "ascent step size");
    train->add_option("--pairs", learn_cfg.pair_sample_size,
                      "pairs sampled per step");
    train->add_option("--budget", learn_cfg.frobenius_budget,
                      "Frobenius norm budget");
    train->add_option("--holdout", holdout, "holdout fraction");

    auto* rank = app.add_subcommand("rank", "rank objects by informativeness");
    std::string rank_data;
    std::string matrix_path;
    std::size_t top = 7;
    std::string algo = "fitness";
    rank->add_option("--data", rank_data, "objects CSV (d,v,r,c)")->required();
    rank->add_option("--matrix", matrix_path, "fitness matrix file")
        ->required();
    rank->add_option("--top", top, "how many objects to display");
    rank->add_option("--algo", algo, "fitness or radix");

    auto* packet = app.add_subcommand("packet", "encode or decode frames");
    packet->require_subcommand(1);
    auto* encode = packet->add_subcommand("encode", "fields to hex");
    int ttl = 2;
    std::string msg_type = "safety";
    unsigned timestamp = 0;
    double lat = 0.0, lon = 0.0, velocity = 0.0, direction = 0.0;
    unsigned category = 1;
    std::vector<std::string> object_specs;
    encode->add_option("--ttl", ttl, "hop budget");
    encode->add_option("--msg-type", msg_type, "safety or nonsafety");
    encode->add_option("--timestamp", timestamp, "epoch deciseconds, 16 bit");
    encode->add_option("--lat", lat, "latitude in degrees");
    encode->add_option("--lon", lon, "longitude in degrees");
    encode->add_option("--velocity", velocity, "sender speed in m/s");
    encode->add_option("--direction", direction, "sender heading in degrees");
    encode->add_option("--category", category, "sender vehicle class");
    encode->add_option("--object", object_specs,
                       "id,px,py,velocity,distance,label,confidence; repeatable");
    auto* decode = packet->add_subcommand("decode", "hex to field listing");
    std::string hex_text;
    decode->add_option("hex", hex_text, "hex dump of a framed packet")
        ->required();

    std::vector<const char*> argv;
    argv.push_back("aicp");
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()),
                  const_cast<char**>(argv.data()));
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*sim) {
            return cmd_simulate(scenario_path, filter_override,
                                seed_opt->count() > 0, seed_override, out);
        }
        if (*train) {
            if (synthetic == 0 && train_data.empty()) {
                throw std::runtime_error(
                    "train needs --synthetic N or --data <csv>");
            }
            return cmd_train(synthetic, train_data, matrix_out, learn_cfg,
                             holdout, out);
        }
        if (*rank) {
            return cmd_rank(rank_data, matrix_path, top, algo, out);
        }
        if (*packet) {
            if (*encode) {
                CmrPacket p;
                p.ttl = static_cast<std::uint8_t>(ttl);
                if (msg_type != "safety" && msg_type != "nonsafety") {
                    throw std::runtime_error(
                        "--msg-type must be safety or nonsafety");
                }
                p.payload.msg_type = msg_type == "safety"
                                         ? MessageType::Safety
                                         : MessageType::NonSafety;
                p.payload.timestamp = static_cast<std::uint16_t>(timestamp);
                p.payload.set_position(lat, lon);
                p.payload.imu = ImuBlock::from_si(
                    velocity, direction, static_cast<std::uint8_t>(category));
                for (const std::string& spec : object_specs) {
                    p.payload.objects.push_back(parse_object_spec(spec));
                }
                print_hex(out, encode_packet(p));
                return 0;
            }
            print_packet(out, decode_packet(parse_hex(hex_text)));
            return 0;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    err << "error: no command selected\n";
    return 1;
}

}  // namespace aicp
