#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "semcert/diagnostics.hpp"
#include "semcert/kernel.hpp"
#include "semcert/provider.hpp"
#include "semcert/transport.hpp"

namespace semcert::io {

using json = nlohmann::ordered_json;

/// Rejects missing or unknown keys; every file schema here is exact.
void require_keys(const json& j, std::initializer_list<const char*> keys, const char* what);

// --- spaces and kernels ----------------------------------------------------
// Space file: { "states": [string], "distance": [[number]], "base_point": int }
// Kernel file: space keys plus "matrix": [[number]]

MetricSpace space_from_json(const json& j);
json space_to_json(const MetricSpace& space);
Kernel kernel_from_json(const json& j);
json kernel_to_json(const Kernel& kernel);

// --- certificates ------------------------------------------------------------
// { "x0": int, "times": [int], "slacks": [number], "F": {...}, "F_bounded": bool }
// F: {"type":"constant","value":c} | {"type":"affine","a":..,"b":..}
//    | {"type":"table","args":[..],"values":[..]}

diagnostics::FuncDesc func_from_json(const json& j);
json func_to_json(const diagnostics::FuncDesc& f);
diagnostics::AsfPlusCertificate certificate_from_json(const json& j);
json certificate_to_json(const diagnostics::AsfPlusCertificate& cert);

// --- providers ---------------------------------------------------------------
// Either { "builtin": name, "params": {...} } or a list of
// { "x": int, "y": int, "t": int, "joint": [[number]] }.

struct ProviderFile {
  bool builtin = false;
  std::string name;
  json params;                                  // builtin only
  std::unique_ptr<CouplingProvider> explicit_provider;  // file-backed only
};

ProviderFile provider_from_json(const json& j, std::size_t space_size);

// --- couplings ---------------------------------------------------------------
// { "rows": [string], "cols": [string], "joint": [[number]] }

json coupling_to_json(const transport::Coupling& c, const MetricSpace& space);

// --- reports -----------------------------------------------------------------

json report_to_json(const diagnostics::AsfPlusReport& r, const MetricSpace& space);
json report_to_json(const diagnostics::LwiReport& r, const MetricSpace& space);
json report_to_json(const diagnostics::A1Report& r, const MetricSpace& space);
json report_to_json(const diagnostics::A2Report& r, const MetricSpace& space);
json report_to_json(const diagnostics::Verdict& v, const MetricSpace& space);
json report_to_json(const diagnostics::SeparationResult& r, const MetricSpace& space);
json report_to_json(const diagnostics::AsfProfile& p, const MetricSpace& space);
json decomposition_to_json(const ErgodicDecomposition& d, const MetricSpace& space);

std::string report_to_csv(const diagnostics::AsfPlusReport& r, const MetricSpace& space);
std::string report_to_csv(const diagnostics::LwiReport& r, const MetricSpace& space);
std::string report_to_csv(const diagnostics::A1Report& r, const MetricSpace& space);
std::string report_to_csv(const diagnostics::A2Report& r, const MetricSpace& space);
std::string report_to_csv(const diagnostics::AsfProfile& p, const MetricSpace& space);
std::string decomposition_to_csv(const ErgodicDecomposition& d, const MetricSpace& space);

// --- files -------------------------------------------------------------------

json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace semcert::io
