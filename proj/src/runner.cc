#include "bugport/runner.h"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <thread>

#include "bugport/corpus_io.h"
#include "bugport/errors.h"
#include "bugport/render.h"

namespace bugport {
namespace {

using Clock = std::chrono::steady_clock;

template <typename Fn>
auto AsProtocol(const char* what, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ProtocolError&) {
    throw;
  } catch (const std::exception& e) {
    throw ProtocolError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

RunnerRequest MakeRequest(const SynthesizedCase& synthesized, std::string source,
                          double timeout_s) {
  if (!(timeout_s > 0)) throw ConfigError("timeout must be positive");
  RunnerRequest request;
  request.case_id = synthesized.id;
  request.source = std::move(source);
  request.timeout_s = timeout_s;
  if (const auto* perf = std::get_if<PerformanceOracle>(&synthesized.oracle)) {
    for (auto [slot, recipe] : {std::pair{kBaselineSlot, &perf->baseline},
                                std::pair{kSubjectSlot, &perf->subject}}) {
      request.recipes.push_back(
          {std::string(slot), recipe->metric, recipe->repetitions, recipe->warmup_runs});
    }
  }
  return request;
}

Json ToJson(const RunnerRequest& request) {
  Json recipes = Json::array();
  for (const auto& r : request.recipes) {
    recipes.push_back({{"slot", r.slot},
                       {"metric", ToString(r.metric)},
                       {"repetitions", r.repetitions},
                       {"warmup_runs", r.warmup_runs}});
  }
  return {{"case_id", request.case_id},
          {"source", request.source},
          {"recipes", recipes},
          {"timeout_s", request.timeout_s}};
}

RunnerRequest RequestFromJson(const Json& j) {
  return AsProtocol("malformed request", [&] {
    RunnerRequest request;
    request.case_id = j.at("case_id").get<std::string>();
    request.source = j.at("source").get<std::string>();
    request.timeout_s = j.at("timeout_s").get<double>();
    if (!(request.timeout_s > 0)) throw ProtocolError("timeout_s must be positive");
    for (const auto& r : j.at("recipes")) {
      RecipeDescriptor d;
      d.slot = r.at("slot").get<std::string>();
      const auto metric = ParseMetric(r.at("metric").get<std::string>());
      if (!metric) throw ProtocolError("unknown metric in request");
      d.metric = *metric;
      d.repetitions = r.at("repetitions").get<int>();
      d.warmup_runs = r.at("warmup_runs").get<int>();
      request.recipes.push_back(std::move(d));
    }
    return request;
  });
}

Json ToJson(const RunnerResponse& response) {
  Json flags = Json::array();
  for (auto f : response.flags) flags.push_back(ToString(f));
  Json measurements = Json::object();
  for (const auto& [slot, sample] : response.measurements) {
    measurements[slot] = {{"metric", ToString(sample.metric)}, {"samples", sample.samples}};
  }
  Json j = {{"case_id", response.case_id},
            {"status", ToString(response.status)},
            {"flags", flags},
            {"measurements", measurements},
            {"wall_time_s", response.wall_time_s}};
  if (response.exception) {
    j["exception"] = {{"type", response.exception->type},
                      {"message", response.exception->message}};
  }
  return j;
}

RunnerResponse ResponseFromJson(const Json& j) {
  return AsProtocol("malformed response", [&] {
    if (!j.is_object()) throw ProtocolError("response is not an object");
    RunnerResponse r;
    r.case_id = j.at("case_id").get<std::string>();
    const auto status = ParseRunStatus(j.at("status").get<std::string>());
    if (!status) throw ProtocolError("unknown status");
    r.status = *status;
    if (j.contains("exception") && !j["exception"].is_null()) {
      const auto& e = j["exception"];
      r.exception = ExceptionSignature{e.at("type").get<std::string>(),
                                       e.value("message", std::string())};
    }
    if ((r.status == RunStatus::kRaised) != r.exception.has_value()) {
      throw ProtocolError("exception must be present exactly when status is raised");
    }
    for (const auto& f : j.value("flags", Json::array())) {
      const auto pattern = ParseAnomalyPattern(f.get<std::string>());
      if (!pattern) throw ProtocolError("unknown flag '" + f.get<std::string>() + "'");
      r.flags.insert(*pattern);
    }
    const Json measurements = j.value("measurements", Json::object());
    if (!measurements.is_object()) throw ProtocolError("measurements must be an object");
    for (auto it = measurements.begin(); it != measurements.end(); ++it) {
      MeasurementSample sample;
      const auto metric = ParseMetric(it.value().at("metric").get<std::string>());
      if (!metric) throw ProtocolError("unknown metric for slot '" + it.key() + "'");
      sample.metric = *metric;
      sample.samples = it.value().at("samples").get<std::vector<double>>();
      r.measurements.emplace(it.key(), std::move(sample));
    }
    r.wall_time_s = j.value("wall_time_s", 0.0);
    return r;
  });
}

Json HelloMessage(int protocol) { return {{"type", "hello"}, {"protocol", protocol}}; }

Json ToJson(const Capabilities& caps) {
  return {{"type", "hello"},
          {"protocol_versions", caps.protocol_versions},
          {"capabilities", {{"time", caps.time}, {"memory", caps.memory}}},
          {"dialect", caps.dialect}};
}

Capabilities CheckHello(const Json& reply, int host_protocol) {
  Capabilities caps = AsProtocol("malformed hello", [&] {
    if (reply.at("type").get<std::string>() != "hello") {
      throw ProtocolError("expected a hello message");
    }
    Capabilities c;
    c.protocol_versions = reply.at("protocol_versions").get<std::vector<int>>();
    const auto& flags = reply.at("capabilities");
    c.time = flags.value("time", false);
    c.memory = flags.value("memory", false);
    c.dialect = reply.at("dialect").get<std::string>();
    return c;
  });
  for (int v : caps.protocol_versions) {
    if (v == host_protocol) return caps;
  }
  std::string offered;
  for (int v : caps.protocol_versions) {
    offered += (offered.empty() ? "" : ",") + std::to_string(v);
  }
  throw VersionMismatchError("runner speaks protocol [" + offered + "], host needs " +
                             std::to_string(host_protocol));
}

ExecutionResult RunCase(const RunnerRequest& request, RunnerHandle& runner,
                        const ExceptionNormalizer& normalize) {
  ExecutionResult result;
  result.case_id = request.case_id;
  result.runner_id = runner.id();
  RunnerResponse response;
  try {
    response = runner.Execute(request);
  } catch (const ProtocolError& e) {
    result.status = RunStatus::kCrashed;
    result.runner_error = std::string("protocol: ") + e.what();
    return result;
  } catch (const RunnerDeadError& e) {
    result.status = RunStatus::kCrashed;
    result.runner_error = std::string("runner-dead: ") + e.what();
    return result;
  }
  result.case_id = response.case_id;
  result.status = response.status;
  if (response.exception) {
    result.raw_message = response.exception->type + ": " + response.exception->message;
    result.exception = normalize(response.exception->type, response.exception->message);
  }
  result.flags = std::move(response.flags);
  result.measurements = std::move(response.measurements);
  result.wall_time_s = response.wall_time_s;
  return result;
}

MockScript MockScript::Parse(std::string_view text, const std::string& source) {
  MockScript script;
  ForEachRecord(text, source, [&](const Json& record, const std::string& where) {
    if (record.value("kind", "") != "mock_response") {
      throw ParseError("expected a mock_response record");
    }
    MockEntry entry;
    entry.response = record.value("response", Json::object());
    if (!entry.response.is_object()) throw ParseError("response must be an object");
    entry.sleep_s = record.value("sleep_s", 0.0);
    entry.abort = record.value("abort", false);
    const auto fingerprint = record.at("fingerprint").get<std::string>();
    // Validate the payload now rather than mid-run.
    Json probe = entry.response;
    probe["case_id"] = "probe";
    if (!probe.contains("status")) probe["status"] = "completed";
    try {
      ResponseFromJson(probe);
    } catch (const ProtocolError& e) {
      throw ParseError(e.what());
    }
    if (script.Find(fingerprint)) {
      throw DuplicateError(where + ": fingerprint '" + fingerprint + "' scripted twice");
    }
    script.Add(fingerprint, std::move(entry));
  });
  return script;
}

MockScript MockScript::Load(const std::string& path) {
  return Parse(ReadFile(path), path);
}

void MockScript::Add(const std::string& fingerprint, MockEntry entry) {
  entries_[fingerprint] = std::move(entry);
}

const MockEntry* MockScript::Find(const std::string& fingerprint) const {
  auto it = entries_.find(fingerprint);
  return it == entries_.end() ? nullptr : &it->second;
}

std::optional<std::string> FindFingerprint(std::string_view source) {
  const auto at = source.find(kFingerprintMarker);
  if (at == std::string_view::npos) return std::nullopt;
  const auto begin = at + kFingerprintMarker.size();
  auto end = source.find_first_of(" \t\r\n", begin);
  if (end == std::string_view::npos) end = source.size();
  return std::string(source.substr(begin, end - begin));
}

RunnerResponse ScriptedResponse(const MockScript& script, const RunnerRequest& request,
                                const MockEntry** entry) {
  const auto fingerprint = FindFingerprint(request.source);
  *entry = fingerprint ? script.Find(*fingerprint) : nullptr;
  Json payload = *entry ? (*entry)->response : Json::object();
  payload["case_id"] = request.case_id;
  if (!payload.contains("status")) payload["status"] = "completed";
  return ResponseFromJson(payload);
}

MockRunner::MockRunner(std::shared_ptr<const MockScript> script, std::string id)
    : script_(std::move(script)), id_(std::move(id)) {}

Capabilities MockRunner::Handshake() { return {{kProtocolVersion}, true, true, "mock"}; }

RunnerResponse MockRunner::Execute(const RunnerRequest& request) {
  const MockEntry* entry = nullptr;
  RunnerResponse response = ScriptedResponse(*script_, request, &entry);
  if (entry && entry->abort) return {request.case_id, RunStatus::kCrashed, {}, {}, {}, 0.0};
  if (entry && entry->sleep_s >= request.timeout_s) {
    return {request.case_id, RunStatus::kTimeout, {}, {}, {}, request.timeout_s};
  }
  return response;
}

ProcessRunner::ProcessRunner(std::string command, std::string id, double handshake_timeout_s)
    : command_(std::move(command)), id_(std::move(id)),
      handshake_timeout_s_(handshake_timeout_s) {
  ::signal(SIGPIPE, SIG_IGN);
}

ProcessRunner::~ProcessRunner() {
  if (!alive()) return;
  ::close(to_child_);
  to_child_ = -1;
  const auto deadline = Clock::now() + std::chrono::seconds(1);
  while (Clock::now() < deadline) {
    int status = 0;
    if (::waitpid(pid_, &status, WNOHANG) == pid_) {
      pid_ = -1;
      ::close(from_child_);
      return;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  Kill();
}

void ProcessRunner::Start() {
  int in[2];
  int out[2];
  if (::pipe2(in, O_CLOEXEC) != 0) throw RunnerDeadError("pipe failed");
  if (::pipe2(out, O_CLOEXEC) != 0) {
    ::close(in[0]);
    ::close(in[1]);
    throw RunnerDeadError("pipe failed");
  }
  const std::string shell_command = "exec " + command_;
  const pid_t pid = ::fork();
  if (pid < 0) throw RunnerDeadError("fork failed");
  if (pid == 0) {
    ::dup2(in[0], STDIN_FILENO);
    ::dup2(out[1], STDOUT_FILENO);
    ::setpgid(0, 0);
    ::execl("/bin/sh", "sh", "-c", shell_command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(in[0]);
  ::close(out[1]);
  pid_ = pid;
  to_child_ = in[1];
  from_child_ = out[0];
  buffer_.clear();
  ++spawns_;

  std::string line;
  if (!WriteLine(HelloMessage().dump()) ||
      ReadLine(handshake_timeout_s_, &line) != ReadStatus::kLine) {
    Kill();
    throw RunnerDeadError("runner '" + command_ + "' did not complete the handshake");
  }
  try {
    caps_ = CheckHello(AsProtocol("malformed hello", [&] { return Json::parse(line); }));
  } catch (...) {
    Kill();
    throw;
  }
}

void ProcessRunner::Kill() {
  if (pid_ > 0) {
    ::kill(-pid_, SIGKILL);
    ::kill(pid_, SIGKILL);
    int status = 0;
    while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
    }
    pid_ = -1;
  }
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  buffer_.clear();
}

bool ProcessRunner::WriteLine(const std::string& line) {
  std::string data = line + "\n";
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::write(to_child_, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    done += static_cast<std::size_t>(n);
  }
  return true;
}

ProcessRunner::ReadStatus ProcessRunner::ReadLine(double timeout_s, std::string* line) {
  const auto deadline =
      Clock::now() + std::chrono::duration_cast<Clock::duration>(
                         std::chrono::duration<double>(timeout_s));
  while (true) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      *line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return ReadStatus::kLine;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - Clock::now());
    if (left.count() <= 0) return ReadStatus::kTimeout;
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      return ReadStatus::kEof;
    }
    if (ready == 0) return ReadStatus::kTimeout;
    char chunk[4096];
    const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      return ReadStatus::kEof;
    }
    if (n == 0) return ReadStatus::kEof;
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

Capabilities ProcessRunner::Handshake() {
  if (!alive()) Start();
  return *caps_;
}

RunnerResponse ProcessRunner::Execute(const RunnerRequest& request) {
  if (!alive()) Start();
  const std::string payload = ToJson(request).dump();
  if (!WriteLine(payload)) {
    // The session died between cases; one fresh attempt.
    Kill();
    Start();
    if (!WriteLine(payload)) {
      Kill();
      throw RunnerDeadError("runner closed its input");
    }
  }
  std::string line;
  switch (ReadLine(request.timeout_s, &line)) {
    case ReadStatus::kTimeout:
      Kill();
      return {request.case_id, RunStatus::kTimeout, {}, {}, {}, request.timeout_s};
    case ReadStatus::kEof:
      Kill();
      return {request.case_id, RunStatus::kCrashed, {}, {}, {}, 0.0};
    case ReadStatus::kLine:
      break;
  }
  try {
    return ResponseFromJson(AsProtocol("malformed response", [&] { return Json::parse(line); }));
  } catch (const ProtocolError&) {
    Kill();
    throw;
  }
}

int ServeMock(const MockScript& script, const ServeOptions& options, std::istream& in,
              std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json message = Json::parse(line, nullptr, false);
    if (message.is_discarded() || !message.is_object()) return 2;
    if (message.value("type", "") == "hello") {
      out << ToJson(Capabilities{options.protocol_versions, true, true, options.dialect}).dump()
          << '\n'
          << std::flush;
      continue;
    }
    RunnerRequest request;
    try {
      request = RequestFromJson(message);
    } catch (const ProtocolError&) {
      return 2;
    }
    const MockEntry* entry = nullptr;
    RunnerResponse response = ScriptedResponse(script, request, &entry);
    if (entry && entry->sleep_s > 0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(entry->sleep_s));
    }
    if (entry && entry->abort) {
      out.flush();
      rlimit no_core{0, 0};
      ::setrlimit(RLIMIT_CORE, &no_core);
      std::abort();
    }
    out << ToJson(response).dump() << '\n' << std::flush;
  }
  return 0;
}

std::vector<ExecutionResult> RunAll(const std::vector<RunnerRequest>& requests,
                                    const RunnerFactory& factory, int jobs,
                                    const ExceptionNormalizer& normalize) {
  std::vector<ExecutionResult> results(requests.size());
  std::vector<std::size_t> timed;
  std::vector<std::size_t> plain;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    (requests[i].recipes.empty() ? plain : timed).push_back(i);
  }

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), plain.size());
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        auto runner = factory("runner-" + std::to_string(w));
        runner->Handshake();
        for (std::size_t k = w; k < plain.size(); k += workers) {
          results[plain[k]] = RunCase(requests[plain[k]], *runner, normalize);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  if (!timed.empty()) {
    auto runner = factory("perf");
    runner->Handshake();
    for (std::size_t i : timed) results[i] = RunCase(requests[i], *runner, normalize);
  }
  return results;
}

}  // namespace bugport
