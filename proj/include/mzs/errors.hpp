#ifndef MZS_ERRORS_HPP
#define MZS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mzs {

// Base class for all domain/evaluation errors.  Callers that want to
// distinguish failure kinds catch the concrete types below; nothing in the
// library returns NaN silently.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class PoleOfGamma : public Error {
  public:
    explicit PoleOfGamma(const std::string& what) : Error(what) {}
};

class GammaPoleInC : public Error {
  public:
    explicit GammaPoleInC(const std::string& what) : Error(what) {}
};

class NoConvergence : public Error {
  public:
    explicit NoConvergence(const std::string& what) : Error(what) {}
};

class OutOfDomain : public Error {
  public:
    explicit OutOfDomain(const std::string& what) : Error(what) {}
};

class ConvergenceCheckFailed : public Error {
  public:
    explicit ConvergenceCheckFailed(const std::string& what) : Error(what) {}
};

class InvalidTarget : public Error {
  public:
    explicit InvalidTarget(const std::string& what) : Error(what) {}
};

class NoCertifiedMove : public Error {
  public:
    explicit NoCertifiedMove(const std::string& what) : Error(what) {}
};

class DepthCapExceeded : public Error {
  public:
    explicit DepthCapExceeded(const std::string& what) : Error(what) {}
};

class NotAnInteger : public Error {
  public:
    explicit NotAnInteger(const std::string& what) : Error(what) {}
};

class MissingTableEntry : public Error {
  public:
    explicit MissingTableEntry(const std::string& what) : Error(what) {}
};

class ParseError : public Error {
  public:
    explicit ParseError(const std::string& what) : Error(what) {}
};

}  // namespace mzs

#endif
