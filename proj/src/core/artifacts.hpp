#pragma once

#include <string>
#include <vector>

#include "cycles.hpp"
#include "experiments.hpp"
#include "family.hpp"
#include "misiurewicz.hpp"
#include "renorm.hpp"
#include "types.hpp"
#include "vendor_json.hpp"

namespace biflab {

// complex <-> [re, im]; vectors element-wise
nlohmann::json cplx_to_json(cplx z);
cplx cplx_from_json(const nlohmann::json& j);
nlohmann::json cvec_to_json(std::span<const cplx> v);
std::vector<cplx> cvec_from_json(const nlohmann::json& j);

nlohmann::json slice_to_json(const Slice& s);
Slice slice_from_json(const nlohmann::json& j);

// artifacts: self-contained JSON documents carrying a "type" tag plus the
// family and slice needed to re-derive them from scratch
nlohmann::json cycle_to_json(const Cycle& c);
Cycle cycle_from_json(const nlohmann::json& j);

nlohmann::json per_solution_artifact(const Family& fam, const Slice& slice,
                                     int n, cplx w, const PerSolution& sol);
nlohmann::json continuation_artifact(const Family& fam, const Slice& slice,
                                     int n, const ContinuationResult& res);
nlohmann::json neutral_artifact(const Family& fam, const Slice& slice,
                                const NeutralTargetSpec& spec,
                                const NeutralSolution& sol);
NeutralSolution neutral_from_artifact(const nlohmann::json& j,
                                      NeutralTargetSpec* spec_out = nullptr);

nlohmann::json misiurewicz_artifact(const Family& fam, const Slice& slice,
                                    const MisiurewiczCertificate& cert);
MisiurewiczCertificate misiurewicz_from_artifact(const nlohmann::json& j,
                                                 Family* fam_out = nullptr,
                                                 Slice* slice_out = nullptr);

nlohmann::json window_artifact(const RenormWindow& w);
RenormWindow window_from_artifact(const nlohmann::json& j);

nlohmann::json embedding_artifact(const Family& fam,
                                  std::span<const RenormWindow> windows,
                                  const ProductEmbeddingSample& s);
nlohmann::json straightening_artifact(const RenormWindow& w,
                                      const StraighteningDiagnostic& d);
nlohmann::json density_report_artifact(const DensityExperimentReport& r);
nlohmann::json stratification_artifact(const StratificationReport& r);

struct VerifyReport {
  bool pass = false;
  std::vector<std::string> checks;    // invariants that held
  std::vector<std::string> failures;  // named violated invariants
};

/// Recompute every invariant of a stored artifact from scratch.
/// Throws UnknownArtifactType for unparseable or untyped documents.
VerifyReport verify_artifact(const nlohmann::json& artifact);

/// Canonical serialization: sorted keys, fixed spacing, trailing newline.
/// All artifact files are written through this for byte-identical re-runs.
std::string dump_canonical(const nlohmann::json& j);
void write_json_file(const nlohmann::json& j, const std::string& path);
nlohmann::json read_json_file(const std::string& path);

}  // namespace biflab
