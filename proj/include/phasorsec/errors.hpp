#pragma once

#include <stdexcept>
#include <string>

namespace phasorsec {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// timestamps of the channels do not line up
class AlignmentError : public Error { public: using Error::Error; };
// window or index outside the series extent
class RangeError : public Error { public: using Error::Error; };
// numeric input outside the domain of an operation (non-finite, zero matrix, ...)
class DomainError : public Error { public: using Error::Error; };
// malformed specification: bad parameters, bad channel subsets
class SpecError : public Error { public: using Error::Error; };
// unreadable input file
class FormatError : public Error { public: using Error::Error; };
// invalid configuration document
class ConfigError : public Error { public: using Error::Error; };

}  // namespace phasorsec
