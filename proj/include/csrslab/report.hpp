#pragma once

#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "csrslab/experiment.hpp"

namespace csrslab::report {

inline constexpr const char* kSchemaVersion = "1.0";

struct ReportInputs {
  std::vector<experiment::PressureSeriesFit> processes;
  std::vector<experiment::SpectrumFit> single_spectra;  // spectra analysed on their own
  std::optional<experiment::PolarizationFit> polarization;
  double gauge_rel_uncertainty = 0.01;
};

/// JSON report following data/report_schema.json. Slope-type quantities
/// (shift, broadening) carry the pressure-gauge scale uncertainty as a
/// separate systematic term. Throws InputError when no fit is present.
nlohmann::json analysis_report(const ReportInputs& inputs);

/// True when every fit in the inputs converged.
bool all_converged(const ReportInputs& inputs);

}  // namespace csrslab::report
