#pragma once

#include <stdexcept>
#include <string>

namespace qot {

// Base class for every exception thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define QOT_DEFINE_ERROR(NAME)                                          \
    struct NAME : Error {                                               \
        explicit NAME(const std::string& what) : Error(what) {}         \
    }

QOT_DEFINE_ERROR(EmptyGrid);
QOT_DEFINE_ERROR(NonPositiveDensity);
QOT_DEFINE_ERROR(NonFiniteValue);
QOT_DEFINE_ERROR(DimensionMismatch);
QOT_DEFINE_ERROR(NotPositiveDefinite);
QOT_DEFINE_ERROR(TooLarge);
QOT_DEFINE_ERROR(NotACoupling);
QOT_DEFINE_ERROR(EmptyRegion);
QOT_DEFINE_ERROR(TargetOutOfRange);
QOT_DEFINE_ERROR(EpsTooLargeForDelta);
QOT_DEFINE_ERROR(MapNotInjective);
QOT_DEFINE_ERROR(BandwidthUnderResolved);
QOT_DEFINE_ERROR(UnsupportedDimension);
QOT_DEFINE_ERROR(ConfigError);

#undef QOT_DEFINE_ERROR

}  // namespace qot
