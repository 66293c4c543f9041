#ifndef BUGPORT_RECORDS_H_
#define BUGPORT_RECORDS_H_

// JSON encodings of every record kind that crosses a file or wire boundary.
// Decoders throw ParseError with a field-level message.

#include <functional>
#include <string>
#include <string_view>

#include "json.hpp"

#include "bugport/types.h"
#include "bugport/value.h"

namespace bugport {

using Json = nlohmann::json;

struct FunctionGroup;
struct CandidatePair;
struct SynthesizedCase;
struct Skip;
struct ExecutionResult;
struct MeasurementSample;
struct Verdict;

Json ToJson(const Value& value);
Value ValueFromJson(const Json& j);

Json ToJson(const ParamSpec& param);
ParamSpec ParamFromJson(const Json& j);

Json ToJson(const StructuredCall& call);
StructuredCall CallFromJson(const Json& j);

Json ToJson(const MeasurementRecipe& recipe);
MeasurementRecipe RecipeFromJson(const Json& j);

Json ToJson(const OracleSpec& oracle);
OracleSpec OracleFromJson(const Json& j);

Json ToJson(const MeasurementSample& sample);
MeasurementSample SampleFromJson(const Json& j);

// Record-level encoders include the "kind" discriminator.
Json ToJson(const ApiSignature& sig);
ApiSignature SignatureFromJson(const Json& j);
Json ToJson(const SourceFunction& fn);
SourceFunction FunctionFromJson(const Json& j);
Json ToJson(const CallStackTrace& trace);
CallStackTrace TraceFromJson(const Json& j);
Json ToJson(const BugCase& bug);
BugCase BugCaseFromJson(const Json& j);
Json ToJson(const SignaturePair& pair);
SignaturePair SignaturePairFromJson(const Json& j);
Json ToJson(const IssueRecord& issue);
IssueRecord IssueFromJson(const Json& j);
Json ToJson(const FunctionGroup& group);
FunctionGroup GroupFromJson(const Json& j);
Json ToJson(const CandidatePair& pair);
CandidatePair PairFromJson(const Json& j);
Json ToJson(const SynthesizedCase& synthesized);
SynthesizedCase CaseFromJson(const Json& j);
Json ToJson(const Skip& skip);
Skip SkipFromJson(const Json& j);
Json ToJson(const ExecutionResult& result);
ExecutionResult ResultFromJson(const Json& j);
Json ToJson(const Verdict& verdict);
Verdict VerdictFromJson(const Json& j);

// Calls `fn` for each non-blank line of `text` parsed as a JSON object.
// `where` is "<source>:<line>". ParseError and JSON errors raised while
// handling a line are rethrown as ParseError prefixed with `where`; other
// errors propagate unchanged and should carry `where` themselves.
void ForEachRecord(
    std::string_view text, const std::string& source,
    const std::function<void(const Json& record, const std::string& where)>& fn);

}  // namespace bugport

#endif  // BUGPORT_RECORDS_H_
