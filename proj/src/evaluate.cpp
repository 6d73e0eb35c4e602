#include "scoutnet/evaluate.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "scoutnet/errors.hpp"
#include "scoutnet/numio.hpp"

namespace scoutnet {

namespace {

using nlohmann::json;

void check_lengths(const std::vector<double>& preds, const std::vector<double>& labels) {
    if (preds.size() != labels.size()) {
        throw DataError("predictions/labels length mismatch: " +
                        std::to_string(preds.size()) + " vs " +
                        std::to_string(labels.size()));
    }
}

}  // namespace

std::size_t ConfusionMatrix4::total() const {
    std::size_t n = 0;
    for (const auto& row : counts) {
        for (std::size_t c : row) n += c;
    }
    return n;
}

double quantize_output(double y) {
    if (!std::isfinite(y)) throw NumericError("quantize_output: non-finite value");
    // Midpoints 0.165, 0.495, 0.83; exact ties go to the lower class.
    if (y <= 0.165) return 0.0;
    if (y <= 0.495) return 0.33;
    if (y <= 0.83) return 0.66;
    return 1.0;
}

ConfusionMatrix4 confusion(const std::vector<double>& preds,
                           const std::vector<double>& labels) {
    check_lengths(preds, labels);
    ConfusionMatrix4 m;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const int row = class_index(labels[i]);
        const int col = class_index(quantize_output(preds[i]));
        m.counts[row][col]++;
    }
    return m;
}

ClassMeans class_means(const std::vector<double>& preds,
                       const std::vector<double>& labels) {
    check_lengths(preds, labels);
    std::array<double, kClassCount> sums = {0, 0, 0, 0};
    std::array<std::size_t, kClassCount> counts = {0, 0, 0, 0};
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const int c = class_index(labels[i]);
        sums[c] += preds[i];
        counts[c]++;
    }
    ClassMeans means;
    for (int c = 0; c < kClassCount; ++c) {
        if (counts[c] > 0) means[c] = sums[c] / static_cast<double>(counts[c]);
    }
    return means;
}

bool binarize(double label) {
    const int idx = class_index(label);
    return idx >= 2;  // classes 0.66 and 1.0
}

std::vector<bool> binarize(const std::vector<double>& labels) {
    std::vector<bool> out;
    out.reserve(labels.size());
    for (double l : labels) out.push_back(binarize(l));
    return out;
}

std::vector<double> alpha_grid(double start, double stop, double step) {
    if (!(step > 0.0)) throw ConfigError("alpha grid step must be positive");
    if (stop < start) throw ConfigError("alpha grid stop must be >= start");
    std::vector<double> grid;
    // Index arithmetic keeps the grid strictly increasing and hits stop even
    // when start + k*step lands a representation-epsilon above it.
    for (std::size_t k = 0;; ++k) {
        const double a = start + static_cast<double>(k) * step;
        if (a > stop + step * 1e-9) break;
        grid.push_back(std::min(a, stop));
    }
    return grid;
}

std::vector<double> default_alpha_grid() { return alpha_grid(0.0, 0.4, 0.005); }

std::vector<SweepPoint> sweep(const std::vector<double>& preds,
                              const std::vector<bool>& positives,
                              const std::vector<double>& grid) {
    if (preds.size() != positives.size()) {
        throw DataError("sweep: predictions/labels length mismatch");
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw ConfigError("sweep: alpha grid must be strictly increasing");
        }
    }
    std::size_t total_positives = 0;
    for (bool p : positives) total_positives += p ? 1 : 0;
    if (total_positives == 0) {
        throw DataError("sweep: no positive labels, recall undefined");
    }

    std::vector<SweepPoint> out;
    out.reserve(grid.size());
    for (double alpha : grid) {
        SweepPoint pt;
        pt.alpha = alpha;
        std::size_t tp = 0;
        for (std::size_t i = 0; i < preds.size(); ++i) {
            if (preds[i] > alpha) {
                pt.flagged++;
                if (positives[i]) tp++;
            }
        }
        if (pt.flagged > 0) {
            pt.precision = static_cast<double>(tp) / static_cast<double>(pt.flagged);
        }
        pt.recall = static_cast<double>(tp) / static_cast<double>(total_positives);
        out.push_back(pt);
    }
    return out;
}

std::string report_to_json(const EvaluationReport& r) {
    json j;
    j["schema_version"] = r.schema_version;
    j["model_id"] = r.model_id;
    j["dataset_id"] = r.dataset_id;
    j["alpha_grid"] = r.alpha_grid;
    json conf = json::array();
    for (const auto& row : r.confusion.counts) {
        conf.push_back(std::vector<std::size_t>(row.begin(), row.end()));
    }
    j["confusion"] = std::move(conf);
    json means = json::object();
    for (int c = 0; c < kClassCount; ++c) {
        means[format_double(kClassValues[c])] =
            r.class_means[c] ? json(*r.class_means[c]) : json(nullptr);
    }
    j["class_means"] = std::move(means);
    json sweep_arr = json::array();
    for (const auto& pt : r.sweep) {
        json p;
        p["alpha"] = pt.alpha;
        p["flagged"] = pt.flagged;
        p["precision"] = pt.precision ? json(*pt.precision) : json(nullptr);
        p["recall"] = pt.recall;
        sweep_arr.push_back(std::move(p));
    }
    j["sweep"] = std::move(sweep_arr);
    if (!r.predictions.empty()) {
        j["predictions"] = r.predictions;
        j["labels"] = r.labels;
    }
    return j.dump(2);
}

EvaluationReport report_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("malformed report JSON: ") + e.what());
    }
    EvaluationReport r;
    r.schema_version = j.at("schema_version").get<std::string>();
    if (r.schema_version != "1") throw DataError("unsupported report schema_version");
    r.model_id = j.value("model_id", std::string{});
    r.dataset_id = j.value("dataset_id", std::string{});
    r.alpha_grid = j.at("alpha_grid").get<std::vector<double>>();
    const auto& conf = j.at("confusion");
    for (int row = 0; row < kClassCount; ++row) {
        for (int col = 0; col < kClassCount; ++col) {
            r.confusion.counts[row][col] = conf.at(row).at(col).get<std::size_t>();
        }
    }
    const auto& means = j.at("class_means");
    for (int c = 0; c < kClassCount; ++c) {
        const auto& v = means.at(format_double(kClassValues[c]));
        if (!v.is_null()) r.class_means[c] = v.get<double>();
    }
    for (const auto& p : j.at("sweep")) {
        SweepPoint pt;
        pt.alpha = p.at("alpha").get<double>();
        pt.flagged = p.at("flagged").get<std::size_t>();
        if (!p.at("precision").is_null()) pt.precision = p.at("precision").get<double>();
        pt.recall = p.at("recall").get<double>();
        r.sweep.push_back(pt);
    }
    if (j.contains("predictions")) {
        r.predictions = j.at("predictions").get<std::vector<double>>();
        r.labels = j.at("labels").get<std::vector<double>>();
    }
    return r;
}

void write_report(const EvaluationReport& r, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write report file " + path);
    out << report_to_json(r) << '\n';
}

EvaluationReport read_report(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open report file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return report_from_json(buf.str());
}

void write_sweep_csv(const std::vector<SweepPoint>& sweep, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write sweep file " + path);
    out << "alpha,flagged,precision,recall\n";
    for (const auto& pt : sweep) {
        out << format_double(pt.alpha) << ',' << pt.flagged << ',';
        if (pt.precision) out << format_double(*pt.precision);
        out << ',' << format_double(pt.recall) << '\n';
    }
}

std::string format_confusion(const ConfusionMatrix4& m) {
    std::ostringstream out;
    out << "true\\pred";
    for (double v : kClassValues) out << std::setw(8) << format_double(v);
    out << '\n';
    for (int row = 0; row < kClassCount; ++row) {
        out << std::setw(9) << format_double(kClassValues[row]);
        for (int col = 0; col < kClassCount; ++col) {
            out << std::setw(8) << m.counts[row][col];
        }
        out << '\n';
    }
    return out.str();
}

std::string format_class_means(const ClassMeans& means) {
    std::ostringstream out;
    out << "class mean_output\n";
    for (int c = 0; c < kClassCount; ++c) {
        out << std::setw(5) << format_double(kClassValues[c]) << ' ';
        if (means[c]) {
            out << std::fixed << std::setprecision(6) << *means[c];
            out.unsetf(std::ios::fixed);
        } else {
            out << "absent";
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace scoutnet
