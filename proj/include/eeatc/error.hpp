// error.hpp — exception hierarchy shared by all eeatc components.
//
// Every throwing operation documents which of these it raises; callers that
// need to distinguish catch the concrete type, everything else catches Error.

#pragma once

#include <stdexcept>
#include <string>

namespace eeatc {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyInput : public Error { public: using Error::Error; };
class ZeroVariance : public Error { public: using Error::Error; };
class MissingColumn : public Error { public: using Error::Error; };
class TooFewRows : public Error { public: using Error::Error; };
class EmptyAfterDrop : public Error { public: using Error::Error; };
class NonMonotonicTimestamps : public Error { public: using Error::Error; };
class MissingHeader : public Error { public: using Error::Error; };
class MissingMandatoryColumn : public Error { public: using Error::Error; };
class EmptyFile : public Error { public: using Error::Error; };
class NoMotionData : public Error { public: using Error::Error; };
class RankDeficient : public Error { public: using Error::Error; };
class ShapeMismatch : public Error { public: using Error::Error; };
class NotFitted : public Error { public: using Error::Error; };
class NegativeTargets : public Error { public: using Error::Error; };
class ConstantTarget : public Error { public: using Error::Error; };
class EmptyReport : public Error { public: using Error::Error; };
class BadConfig : public Error { public: using Error::Error; };
class SerializationError : public Error { public: using Error::Error; };
class IoError : public Error { public: using Error::Error; };

} // namespace eeatc
