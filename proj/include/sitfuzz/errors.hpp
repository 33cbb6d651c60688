#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sitfuzz {

/// Base of every error the engine raises. `code()` is the stable machine
/// name used in service error bodies and clarification responses.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string &detail) : std::runtime_error(detail), code_(std::move(code)) {}
  const std::string &code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define SITFUZZ_DEFINE_ERROR(Name)                                              \
  class Name : public Error {                                                  \
   public:                                                                     \
    explicit Name(const std::string &detail) : Error(#Name, detail) {}         \
  };

SITFUZZ_DEFINE_ERROR(SchemaError)
SITFUZZ_DEFINE_ERROR(DomainError)
SITFUZZ_DEFINE_ERROR(UniverseMismatch)
SITFUZZ_DEFINE_ERROR(DimensionMismatch)
SITFUZZ_DEFINE_ERROR(UnknownVariable)
SITFUZZ_DEFINE_ERROR(RangeError)
SITFUZZ_DEFINE_ERROR(EmptyLibrary)
SITFUZZ_DEFINE_ERROR(UnknownAct)
SITFUZZ_DEFINE_ERROR(NoApplicableSituation)
SITFUZZ_DEFINE_ERROR(UnknownDecision)
SITFUZZ_DEFINE_ERROR(EmptyEvidence)
SITFUZZ_DEFINE_ERROR(NoAlternatives)
SITFUZZ_DEFINE_ERROR(UnsupportedLanguage)
SITFUZZ_DEFINE_ERROR(NoParse)
SITFUZZ_DEFINE_ERROR(MissingSurfaceForm)
SITFUZZ_DEFINE_ERROR(UnknownKB)
SITFUZZ_DEFINE_ERROR(UnknownSession)

#undef SITFUZZ_DEFINE_ERROR

/// A reference to an id that does not exist in the knowledge base.
class IntegrityError : public Error {
 public:
  explicit IntegrityError(std::string id, const std::string &detail = {})
      : Error("IntegrityError", detail.empty() ? id : detail), id_(std::move(id)) {}
  const std::string &id() const noexcept { return id_; }

 private:
  std::string id_;
};

class BelowThreshold : public Error {
 public:
  BelowThreshold(double conformity, double threshold)
      : Error("BelowThreshold", "conformity " + std::to_string(conformity) + " below threshold " +
                                    std::to_string(threshold)),
        conformity_(conformity) {}
  double conformity() const noexcept { return conformity_; }

 private:
  double conformity_;
};

class LexicalGap : public Error {
 public:
  explicit LexicalGap(std::vector<std::string> words);
  const std::vector<std::string> &words() const noexcept { return words_; }

 private:
  std::vector<std::string> words_;
};

class Ambiguous : public Error {
 public:
  Ambiguous(std::string surface, std::vector<std::string> senses);
  const std::string &surface() const noexcept { return surface_; }
  const std::vector<std::string> &senses() const noexcept { return senses_; }

 private:
  std::string surface_;
  std::vector<std::string> senses_;
};

}  // namespace sitfuzz
