#pragma once

#include <stdexcept>
#include <string>

namespace metaprobe {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidArgument : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };

// geometry
struct ZeroVectorError : Error { using Error::Error; };
struct RankDeficientError : Error { using Error::Error; };
struct CollinearReferencesError : Error { using Error::Error; };
struct SharedEdgeError : Error { using Error::Error; };
struct ConstantSeriesError : Error { using Error::Error; };

// providers / gateway
struct ProviderError : Error { using Error::Error; };
struct EmptyTextError : Error { using Error::Error; };
struct TemplateError : Error { using Error::Error; };

// corpus / experiments / config
struct SchemaError : Error { using Error::Error; };
struct EmptySetError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace metaprobe
