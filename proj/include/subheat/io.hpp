#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"
#include "subheat/cd_verify.hpp"
#include "subheat/heat_mc.hpp"
#include "subheat/heat_spectral.hpp"

namespace subheat {

using Json = nlohmann::ordered_json;

/// printf("%.17g"): enough digits that every double reads back bit-exact.
std::string format_real(double v);

/// Writes to a sibling temporary file and renames it over path, so a failed
/// run never leaves a partial file behind.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// heisenberg (0, 0), se2 (-1, 0), solv-minus (1, 0), rank1-beta(b) (0, b) with b > 0,
/// delta-zero(l) (-l^2, 2 l) with l != 0. Throws Error{InvalidInput} otherwise.
Parameters preset_parameters(std::string_view name);

/// {"alpha": a, "beta": b} for the canonical triple, or
/// {"brackets": [[i, j, c0, c1, c2], ...], "h_basis": [[..3..], [..3..]], "metric": [[..2..], [..2..]]}
/// with [e_i, e_j] = sum_k c_k e_k; h_basis and metric are optional.
SubRiemannianTriple triple_from_json(const Json& j);
Json to_json(const SubRiemannianTriple& triple);

Json to_json(const Classification& c);
Json to_json(const AffineRep& rep);
Json to_json(const KernelEstimate& k);
Json to_json(const SpectralKernelResult& s);
Json to_json(const OracleResult& o);
Json to_json(const MassResult& m);
Json to_json(const McSpec& spec);
Json to_json(const OracleConfig& config);
Json to_json(const SdeSpec& spec);
/// Summary with the worst record; include_residuals adds every record.
Json to_json(const CDReport& r, bool include_residuals = false);
Json to_json(const BoundReport& r);

/// Wraps a payload as {"kind": kind, "version": 1, ...payload}.
Json document(std::string_view kind, Json payload);

/// Checks a parsed document against the schema for its "kind".
/// Throws Error{InvalidInput} naming the first missing or mistyped member.
void validate_document(const Json& doc);

}  // namespace subheat
