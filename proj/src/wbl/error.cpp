#include "wbl/error.hpp"

namespace wbl {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::MalformedRecord: return "MalformedRecord";
    case Errc::DanglingReference: return "DanglingReference";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::UnrankedTopic: return "UnrankedTopic";
    case Errc::WrongConversationCount: return "WrongConversationCount";
    case Errc::ProviderUnavailable: return "ProviderUnavailable";
    case Errc::UnparseableScore: return "UnparseableScore";
    case Errc::EmptyText: return "EmptyText";
    case Errc::MissingRole: return "MissingRole";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::RemoteNondeterminism: return "RemoteNondeterminism";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::NonFinite: return "NonFinite";
    case Errc::NoWithinVariation: return "NoWithinVariation";
    case Errc::SingleSubject: return "SingleSubject";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::ZeroWithinVariance: return "ZeroWithinVariance";
    case Errc::TooFewGroups: return "TooFewGroups";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::TooManyPredictors: return "TooManyPredictors";
    case Errc::NonPositiveSE: return "NonPositiveSE";
    case Errc::TooFewPermutations: return "TooFewPermutations";
    case Errc::MissingSentiment: return "MissingSentiment";
    case Errc::NoUserUtterances: return "NoUserUtterances";
    case Errc::TooFewObservations: return "TooFewObservations";
    case Errc::UnscoredEntries: return "UnscoredEntries";
    case Errc::IncompleteCv: return "IncompleteCv";
    case Errc::NotChatCondition: return "NotChatCondition";
    case Errc::UnscoredUtterances: return "UnscoredUtterances";
    case Errc::DegeneratePositions: return "DegeneratePositions";
    case Errc::TooFewConversations: return "TooFewConversations";
    case Errc::UnscoredConversations: return "UnscoredConversations";
    case Errc::TooFewLaggedRows: return "TooFewLaggedRows";
    case Errc::ConstantSeries: return "ConstantSeries";
    case Errc::MissingCondition: return "MissingCondition";
    case Errc::UnrankedTopics: return "UnrankedTopics";
    case Errc::IncompleteSimulation: return "IncompleteSimulation";
    case Errc::UnknownCondition: return "UnknownCondition";
    case Errc::ConversationOver: return "ConversationOver";
    case Errc::UpstreamFailure: return "UpstreamFailure";
    case Errc::NoActiveConversation: return "NoActiveConversation";
    case Errc::TooEarly: return "TooEarly";
    case Errc::WrongCondition: return "WrongCondition";
    case Errc::WrongPhase: return "WrongPhase";
    case Errc::ActiveSessions: return "ActiveSessions";
    case Errc::ReplyPending: return "ReplyPending";
    case Errc::NotFound: return "NotFound";
    case Errc::Unauthorized: return "Unauthorized";
    case Errc::ConfigError: return "ConfigError";
    case Errc::IoError: return "IoError";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

ErrorCategory errc_category(Errc code) noexcept {
  switch (code) {
    case Errc::ConfigError:
      return ErrorCategory::config;
    case Errc::ProviderUnavailable:
    case Errc::UnparseableScore:
    case Errc::RemoteNondeterminism:
    case Errc::UpstreamFailure:
      return ErrorCategory::upstream;
    case Errc::ConversationOver:
    case Errc::NoActiveConversation:
    case Errc::TooEarly:
    case Errc::WrongCondition:
    case Errc::WrongPhase:
    case Errc::ActiveSessions:
    case Errc::ReplyPending:
    case Errc::NotFound:
    case Errc::Unauthorized:
      return ErrorCategory::state;
    case Errc::IoError:
      return ErrorCategory::io;
    case Errc::InvalidArgument:
    case Errc::UnknownCondition:
      return ErrorCategory::argument;
    default:
      return ErrorCategory::data;
  }
}

}  // namespace wbl
