#pragma once

#include <stdexcept>
#include <string>

namespace vvuq {

/// Base of every error thrown by the library. `code()` is a short stable
/// identifier used by the CLI and the pilot-job wire protocol.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define VVUQ_DEFINE_ERROR(Name, code_str)                             \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what) : Error(code_str, what) {} \
  };

// campaign
VVUQ_DEFINE_ERROR(ConfigError, "config-error")
VVUQ_DEFINE_ERROR(TemplateError, "template-error")
VVUQ_DEFINE_ERROR(EncodingError, "encoding-error")
VVUQ_DEFINE_ERROR(DecodeError, "decode-error")
VVUQ_DEFINE_ERROR(StoreCorrupt, "store-corrupt")
VVUQ_DEFINE_ERROR(IoError, "io-error")
VVUQ_DEFINE_ERROR(TransitionError, "transition-error")

// sampling
VVUQ_DEFINE_ERROR(DomainError, "domain-error")
VVUQ_DEFINE_ERROR(SizeError, "size-error")
VVUQ_DEFINE_ERROR(SamplerError, "sampler-error")

// analysis
VVUQ_DEFINE_ERROR(MissingRunError, "missing-run")
VVUQ_DEFINE_ERROR(BasisError, "basis-error")
VVUQ_DEFINE_ERROR(EmptyInput, "empty-input")

// vvp
VVUQ_DEFINE_ERROR(BinningError, "binning-error")
VVUQ_DEFINE_ERROR(ScorerError, "scorer-error")

// pilot job
VVUQ_DEFINE_ERROR(ValidationError, "validation-error")
VVUQ_DEFINE_ERROR(NotFound, "not-found")
VVUQ_DEFINE_ERROR(AlreadyTerminal, "already-terminal")
VVUQ_DEFINE_ERROR(ParseError, "parse-error")
VVUQ_DEFINE_ERROR(BindError, "bind-error")

// driver
VVUQ_DEFINE_ERROR(ExecutorError, "executor-error")

#undef VVUQ_DEFINE_ERROR

}  // namespace vvuq
