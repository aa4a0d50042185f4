#pragma once

#include "flagop/core.hpp"
#include "flagop/flag.hpp"
#include "flagop/irreducibility.hpp"
#include "flagop/quasisim.hpp"
#include "flagop/rkhs.hpp"
#include "flagop/sylvester.hpp"
#include "flagop/weights.hpp"

#include <json.hpp>

#include <string>

namespace flagop {

using Json = nlohmann::ordered_json;

// Schema violation at a JSON pointer.
class ConfigError : public Error {
 public:
  ConfigError(std::string pointer, const std::string& message);
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

Json to_json(const WeightSequence& seq);
Json to_json(const DiagonalKernel& kernel);
Json to_json(const FlagSpec& spec);
Json to_json(const Matrix& m);

WeightSequence weight_sequence_from_json(const Json& j, const std::string& ptr = "");
DiagonalKernel kernel_from_json(const Json& j, const std::string& ptr = "");
FlagSpec flag_spec_from_json(const Json& j, const std::string& ptr = "");
Matrix matrix_from_json(const Json& j, const std::string& ptr = "");

Json to_json(const ShieldsReport& r);
Json to_json(const MembershipThresholds& t);
Json to_json(const MembershipReport& r);
Json to_json(const KerRanReport& r);
Json to_json(const IntertwinerStructureReport& r);
Json to_json(const FlagReport& r);
Json to_json(const ConditionAReport& r);
Json to_json(const ReductionResult& r);
Json to_json(const LeakageReport& r);
Json to_json(const BandReport& r);
Json to_json(const BlockShields& b);
Json to_json(const SimilarityCertificate& c);
Json to_json(const QuasiSimilarityReport& r);
Json to_json(const SIReport& r);
Json to_json(const RatioDivergence& r);
Json to_json(const KernelRelationReport& r);
Json to_json(const GalleryReport& r);

// Helpers shared by the decoders.
void reject_unknown(const Json& obj, std::initializer_list<const char*> allowed, const std::string& ptr);
double number_at(const Json& obj, const char* key, const std::string& ptr);

}  // namespace flagop
