#include "pwtl/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "csv.hpp"
#include "pwtl/error.hpp"
#include "pwtl/parallel.hpp"

namespace pwtl {

namespace {

bool same_real(double a, double b) {
    return (std::isnan(a) && std::isnan(b)) || a == b;
}

constexpr const char* kSuffixes[] = {"_red", "_green", "_offset"};

}  // namespace

bool operator==(const DatasetRow& a, const DatasetRow& b) {
    return a.run_id == b.run_id && a.seed == b.seed && a.signals == b.signals &&
           same_real(a.avg_speed, b.avg_speed) && same_real(a.queue_length, b.queue_length) &&
           a.status == b.status;
}

std::size_t Dataset::ok_count() const {
    std::size_t n = 0;
    for (const auto& r : rows) {
        n += r.ok() ? 1 : 0;
    }
    return n;
}

Dataset generate(const RoadNetwork& net, const SimState& initial, const SimParams& params,
                 const GenerateOptions& options) {
    if (options.runs < 1) {
        throw std::invalid_argument("generate: at least one run is required");
    }
    if (net.signalized_ids().empty()) {
        throw std::invalid_argument("generate: network has no signalized intersection");
    }
    params.validate();
    if (const auto cfl = check_cfl(net, params.dt); !cfl.ok()) {
        throw CflError("CFL condition violated (max ratio " + std::to_string(cfl.max_ratio) + ")");
    }

    Dataset table;
    table.intersection_ids = net.signalized_ids();
    table.rows.resize(static_cast<std::size_t>(options.runs));

    parallel_for(table.rows.size(), options.workers, [&](std::size_t i) {
        DatasetRow& row = table.rows[i];
        row.run_id = static_cast<std::int64_t>(i);
        row.seed = derive_seed(options.seed, i);
        Rng rng(row.seed);
        const SignalConfiguration cfg = sample_config(net, rng);
        row.signals = ordered_signals(cfg, table.intersection_ids);
        try {
            const RunResult result = run(net, initial, cfg, params, options.run);
            row.avg_speed = result.metrics.avg_speed;
            row.queue_length = result.metrics.queue_length;
            if (!std::isfinite(row.avg_speed) || !std::isfinite(row.queue_length)) {
                throw NumericalError("non-finite metrics");
            }
            row.status = "ok";
        } catch (const std::exception& e) {
            row.avg_speed = std::nan("");
            row.queue_length = std::nan("");
            std::string what = e.what();
            for (char& c : what) {
                if (c == ',' || c == '\n' || c == '\r') {
                    c = ';';
                }
            }
            row.status = "failed: " + what;
        }
    });
    return table;
}

void write_csv(const Dataset& table, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << "run_id,seed";
    for (const auto& id : table.intersection_ids) {
        for (const char* suffix : kSuffixes) {
            out << ',' << id << suffix;
        }
    }
    out << ",avg_speed,queue_length,status\n";
    for (const auto& row : table.rows) {
        if (row.signals.size() != table.intersection_ids.size()) {
            throw std::invalid_argument("write_csv: row " + std::to_string(row.run_id) +
                                        " has the wrong number of intersections");
        }
        out << row.run_id << ',' << row.seed;
        for (const auto& s : row.signals) {
            out << ',' << s.red << ',' << s.green << ',' << s.offset;
        }
        out << ',' << detail::format_double(row.avg_speed) << ','
            << detail::format_double(row.queue_length) << ',' << row.status << '\n';
    }
}

Dataset read_csv(const std::filesystem::path& path) {
    const auto csv = detail::read_csv_file(path);
    const auto c_run = csv.column("run_id", path);
    const auto c_seed = csv.column("seed", path);
    const auto c_speed = csv.column("avg_speed", path);
    const auto c_queue = csv.column("queue_length", path);
    const auto c_status = csv.column("status", path);

    Dataset table;
    for (std::size_t c = 0; c < csv.header.size(); ++c) {
        const std::string& name = csv.header[c];
        const std::string suffix = "_red";
        if (name.size() > suffix.size() && name.ends_with(suffix)) {
            const std::string id = name.substr(0, name.size() - suffix.size());
            table.intersection_ids.push_back(id);
            csv.column(id + "_green", path);
            csv.column(id + "_offset", path);
        }
    }

    for (const auto& r : csv.rows) {
        DatasetRow row;
        row.run_id = detail::parse_int(r.fields[c_run], path, r.line);
        {
            const std::string& text = r.fields[c_seed];
            const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), row.seed);
            if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
                throw ParseError(path.string() + ":" + std::to_string(r.line) + ": bad seed '" + text + "'");
            }
        }
        for (const auto& id : table.intersection_ids) {
            IntersectionSignal s;
            s.red = static_cast<int>(detail::parse_int(r.fields[csv.column(id + "_red", path)], path, r.line));
            s.green =
                static_cast<int>(detail::parse_int(r.fields[csv.column(id + "_green", path)], path, r.line));
            s.offset =
                static_cast<int>(detail::parse_int(r.fields[csv.column(id + "_offset", path)], path, r.line));
            if (!s.valid()) {
                throw ParseError(path.string() + ":" + std::to_string(r.line) + ": signal timings of '" +
                                 id + "' out of range");
            }
            row.signals.push_back(s);
        }
        row.avg_speed = detail::parse_double(r.fields[c_speed], path, r.line);
        row.queue_length = detail::parse_double(r.fields[c_queue], path, r.line);
        row.status = r.fields[c_status];
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace pwtl
