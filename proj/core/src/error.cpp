#include "dptree/error.hpp"

namespace dptree {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::CycleDetected: return "CycleDetected";
    case ErrorKind::Disconnected: return "Disconnected";
    case ErrorKind::SelfLoop: return "SelfLoop";
    case ErrorKind::DuplicateEdge: return "DuplicateEdge";
    case ErrorKind::NotALeaf: return "NotALeaf";
    case ErrorKind::IsLeaf: return "IsLeaf";
    case ErrorKind::IsolatedVertex: return "IsolatedVertex";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::OverlappingBranches: return "OverlappingBranches";
    case ErrorKind::TooManyPoints: return "TooManyPoints";
    case ErrorKind::EmptyRadiusList: return "EmptyRadiusList";
    case ErrorKind::UnknownKernel: return "UnknownKernel";
    case ErrorKind::TupleSpaceTooLarge: return "TupleSpaceTooLarge";
    case ErrorKind::OutputTooLarge: return "OutputTooLarge";
    case ErrorKind::DegenerateInterval: return "DegenerateInterval";
    case ErrorKind::AllZeroValues: return "AllZeroValues";
    case ErrorKind::NotACover: return "NotACover";
    case ErrorKind::NoEmbeddingsFound: return "NoEmbeddingsFound";
    case ErrorKind::BinTooSmall: return "BinTooSmall";
    case ErrorKind::LadderOutOfRange: return "LadderOutOfRange";
    case ErrorKind::ResolutionFloor: return "ResolutionFloor";
    case ErrorKind::DimensionTooHigh: return "DimensionTooHigh";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace dptree
