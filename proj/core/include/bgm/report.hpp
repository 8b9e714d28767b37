#pragma once

#include <string>
#include <vector>

#include "bgm/fit.hpp"
#include "bgm/mll.hpp"

namespace bgm {

/// Values are rounded to this precision in every serialized report, so
/// identical inputs give byte-identical output.
inline constexpr double kReportPrecision = 1e-10;

std::string scheme_kind_name(SchemeKind kind);

/// Margins, effect assignments, zero blocks and matrix shapes. Matrices are
/// not serialized; they are regenerated from the margins.
std::string model_json(const ModelSpec& model, const std::vector<std::string>& labels);

/// Statistics, per-parameter table and convergence trace.
std::string fit_report_json(const FitResult& r, const std::vector<std::string>& labels);

/// "G2=<v> X2=<v> df=<q> iter=<k> converged=<bool>"
std::string fit_summary_line(const FitResult& r);

/// One line per margin listing its effects; constrained effects in brackets.
std::string format_assignment_table(const ModelSpec& model, const std::vector<std::string>& labels);

/// Margin, effect, levels, estimate, s.e. and studentized columns.
std::string format_estimate_table(const FitResult& r, const std::vector<std::string>& labels);

}  // namespace bgm
