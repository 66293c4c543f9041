#ifndef BUGPORT_ERRORS_H_
#define BUGPORT_ERRORS_H_

#include <stdexcept>
#include <string>

namespace bugport {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Corpus ingestion.
class ParseError : public Error {
 public:
  using Error::Error;
};
class ReferenceError : public Error {
 public:
  using Error::Error;
};
class DuplicateError : public Error {
 public:
  using Error::Error;
};

// Matching and generation.
class EmptyContextError : public Error {
 public:
  using Error::Error;
};
class InfeasibleDirectionError : public Error {
 public:
  using Error::Error;
};
class RankUnresolvableError : public Error {
 public:
  using Error::Error;
};
class RecipeRetargetError : public Error {
 public:
  using Error::Error;
};
class TemplateError : public Error {
 public:
  using Error::Error;
};

// Evaluation and runners.
class MetricMismatchError : public Error {
 public:
  using Error::Error;
};
class ProtocolError : public Error {
 public:
  using Error::Error;
};
class RunnerDeadError : public Error {
 public:
  using Error::Error;
};
class VersionMismatchError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace bugport

#endif  // BUGPORT_ERRORS_H_
