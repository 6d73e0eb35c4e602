#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "scoutnet/labels.hpp"

namespace scoutnet {

// 4x4 counts, rows = true class index, columns = predicted class index
// (classes ascending: 0, 0.33, 0.66, 1.0).
struct ConfusionMatrix4 {
    std::array<std::array<std::size_t, kClassCount>, kClassCount> counts = {};
    std::size_t total() const;

    bool operator==(const ConfusionMatrix4&) const = default;
};

// Mean raw prediction per true class; classes with no members are absent.
using ClassMeans = std::array<std::optional<double>, kClassCount>;

struct SweepPoint {
    double alpha = 0.0;
    std::size_t flagged = 0;               // predictions strictly above alpha
    std::optional<double> precision;       // absent iff flagged == 0
    double recall = 0.0;

    bool operator==(const SweepPoint&) const = default;
};

struct EvaluationReport {
    std::string schema_version = "1";
    std::string model_id;
    std::string dataset_id;
    std::vector<double> alpha_grid;
    ConfusionMatrix4 confusion;
    ClassMeans class_means;
    std::vector<SweepPoint> sweep;
    std::vector<double> predictions;  // raw scores, kept only when requested
    std::vector<double> labels;
};

// Nearest of the four class values; exact midpoint ties go to the lower
// class.
double quantize_output(double y);

ConfusionMatrix4 confusion(const std::vector<double>& preds,
                           const std::vector<double>& labels);

ClassMeans class_means(const std::vector<double>& preds,
                       const std::vector<double>& labels);

// True iff label is 0.66 or 1.0 (the "interesting players" collapse).
bool binarize(double label);
std::vector<bool> binarize(const std::vector<double>& labels);

// Strictly increasing alpha values start, start+step, ... up to stop
// (inclusive when it lands on the grid).
std::vector<double> alpha_grid(double start, double stop, double step);
std::vector<double> default_alpha_grid();  // 0 to 0.4 step 0.005

// Per alpha: flagged = #above, precision = TP/flagged (absent at zero
// flagged), recall = TP/positives. Requires at least one positive label.
std::vector<SweepPoint> sweep(const std::vector<double>& preds,
                              const std::vector<bool>& positives,
                              const std::vector<double>& grid);

void write_report(const EvaluationReport& r, const std::string& path);
EvaluationReport read_report(const std::string& path);
std::string report_to_json(const EvaluationReport& r);
EvaluationReport report_from_json(const std::string& text);

// `alpha,flagged,precision,recall` rows; absent precision is an empty field.
void write_sweep_csv(const std::vector<SweepPoint>& sweep,
                     const std::string& path);

// Aligned text rendering for the CLI.
std::string format_confusion(const ConfusionMatrix4& m);
std::string format_class_means(const ClassMeans& means);

}  // namespace scoutnet
