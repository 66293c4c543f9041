#ifndef BUGPORT_RUNNER_H_
#define BUGPORT_RUNNER_H_

// Host side of the runner wire protocol: newline-delimited JSON objects over
// a runner's stdin/stdout, one request in flight per session. See
// docs/protocol.md for the schema.

#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <sys/types.h>
#include <vector>

#include "bugport/oracle_evaluator.h"
#include "bugport/records.h"
#include "bugport/types.h"

namespace bugport {

inline constexpr int kProtocolVersion = 1;
inline constexpr double kDefaultTimeoutSeconds = 60.0;

struct RecipeDescriptor {
  std::string slot;
  Metric metric = Metric::kWallTimeSeconds;
  int repetitions = 5;
  int warmup_runs = 1;

  bool operator==(const RecipeDescriptor&) const = default;
};

struct RunnerRequest {
  std::string case_id;
  std::string source;
  std::vector<RecipeDescriptor> recipes;
  double timeout_s = kDefaultTimeoutSeconds;

  bool operator==(const RunnerRequest&) const = default;
};

// What a runner reports; the exception is verbatim, not normalized.
struct RunnerResponse {
  std::string case_id;
  RunStatus status = RunStatus::kCompleted;
  std::optional<ExceptionSignature> exception;
  std::set<AnomalyPattern> flags;
  std::map<std::string, MeasurementSample> measurements;
  double wall_time_s = 0.0;

  bool operator==(const RunnerResponse&) const = default;
};

struct Capabilities {
  std::vector<int> protocol_versions;
  bool time = false;
  bool memory = false;
  std::string dialect;

  bool operator==(const Capabilities&) const = default;
};

// Builds the request for a synthesized case with its rendered source.
// Throws ConfigError when timeout_s <= 0.
RunnerRequest MakeRequest(const SynthesizedCase& synthesized, std::string source,
                          double timeout_s);

Json ToJson(const RunnerRequest& request);
// Throws ProtocolError.
RunnerRequest RequestFromJson(const Json& j);
Json ToJson(const RunnerResponse& response);
// Throws ProtocolError. An exception must accompany status "raised" and only
// that status.
RunnerResponse ResponseFromJson(const Json& j);

Json HelloMessage(int protocol = kProtocolVersion);
Json ToJson(const Capabilities& caps);
// Throws ProtocolError for a malformed hello and VersionMismatchError when
// the runner does not speak `host_protocol`.
Capabilities CheckHello(const Json& reply, int host_protocol = kProtocolVersion);

// One runner session. Implementations restart themselves after a crash or a
// timeout so the next case starts from a fresh process.
class RunnerHandle {
 public:
  virtual ~RunnerHandle() = default;

  // Throws VersionMismatchError, ProtocolError or RunnerDeadError.
  virtual Capabilities Handshake() = 0;

  // Exactly one terminal response per request. Timeouts and crashes come
  // back as responses with status kTimeout or kCrashed. Throws ProtocolError
  // for malformed output and RunnerDeadError when no session can be held.
  virtual RunnerResponse Execute(const RunnerRequest& request) = 0;

  virtual std::string id() const = 0;
};

// Sends `request`, converts the response, normalizes its exception and maps
// session failures to a result carrying `runner_error`.
ExecutionResult RunCase(const RunnerRequest& request, RunnerHandle& runner,
                        const ExceptionNormalizer& normalize);

// Scripted responses keyed by case fingerprint.
struct MockEntry {
  Json response = Json::object();  // RunnerResponse fields except case_id
  double sleep_s = 0.0;
  bool abort = false;
};

class MockScript {
 public:
  // Reads {"kind":"mock_response","fingerprint",...} lines. Throws
  // ParseError and DuplicateError.
  static MockScript Parse(std::string_view text, const std::string& source);
  static MockScript Load(const std::string& path);

  void Add(const std::string& fingerprint, MockEntry entry);
  const MockEntry* Find(const std::string& fingerprint) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, MockEntry> entries_;
};

// Fingerprint embedded in rendered source by the template, if any.
std::optional<std::string> FindFingerprint(std::string_view source);

// Scripted payload for `request`, ignoring sleep and abort. Cases without a
// script entry complete with no flags and no measurements. `entry` receives
// the matching entry or nullptr.
RunnerResponse ScriptedResponse(const MockScript& script, const RunnerRequest& request,
                                const MockEntry** entry);

// Deterministic in-process runner: sleeping at least the timeout yields a
// timeout and abort yields a crash, without waiting or forking.
class MockRunner : public RunnerHandle {
 public:
  explicit MockRunner(std::shared_ptr<const MockScript> script, std::string id = "mock");

  Capabilities Handshake() override;
  RunnerResponse Execute(const RunnerRequest& request) override;
  std::string id() const override { return id_; }

 private:
  std::shared_ptr<const MockScript> script_;
  std::string id_;
};

// Runner in a child process started through /bin/sh. The process is killed
// on timeout, after a malformed response, and on destruction.
class ProcessRunner : public RunnerHandle {
 public:
  ProcessRunner(std::string command, std::string id, double handshake_timeout_s = 10.0);
  ~ProcessRunner() override;
  ProcessRunner(const ProcessRunner&) = delete;
  ProcessRunner& operator=(const ProcessRunner&) = delete;

  Capabilities Handshake() override;
  RunnerResponse Execute(const RunnerRequest& request) override;
  std::string id() const override { return id_; }

  // Number of processes started so far.
  int spawn_count() const { return spawns_; }

 private:
  enum class ReadStatus { kLine, kEof, kTimeout };

  void Start();
  void Kill();
  bool alive() const { return pid_ > 0; }
  bool WriteLine(const std::string& line);
  ReadStatus ReadLine(double timeout_s, std::string* line);

  std::string command_;
  std::string id_;
  double handshake_timeout_s_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  int spawns_ = 0;
  std::optional<Capabilities> caps_;
};

struct ServeOptions {
  std::vector<int> protocol_versions = {kProtocolVersion};
  std::string dialect = "mock";
};

// Serves the scripted runner on the given streams until input ends. Scripted
// sleeps really sleep; scripted aborts terminate the process.
int ServeMock(const MockScript& script, const ServeOptions& options, std::istream& in,
              std::ostream& out);

using RunnerFactory = std::function<std::unique_ptr<RunnerHandle>(const std::string& id)>;

// Runs every request and returns results in request order. Performance
// requests run one at a time on a dedicated session after the others have
// finished; the rest are dealt round-robin to `jobs` sessions. Throws
// VersionMismatchError if a session fails its handshake.
std::vector<ExecutionResult> RunAll(const std::vector<RunnerRequest>& requests,
                                    const RunnerFactory& factory, int jobs,
                                    const ExceptionNormalizer& normalize);

}  // namespace bugport

#endif  // BUGPORT_RUNNER_H_
