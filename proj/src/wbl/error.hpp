#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wbl {

// Every failure the library raises carries one of these codes. The names are
// part of the wire format (HTTP error bodies, C API error codes, reports).
enum class Errc {
  // corpus
  MalformedRecord,
  DanglingReference,
  DuplicateId,
  InsufficientData,
  UnrankedTopic,
  WrongConversationCount,
  // sentiment
  ProviderUnavailable,
  UnparseableScore,
  EmptyText,
  MissingRole,
  DimensionMismatch,
  ZeroVector,
  RemoteNondeterminism,
  // stats
  RankDeficient,
  NonFinite,
  NoWithinVariation,
  SingleSubject,
  ZeroVariance,
  LengthMismatch,
  ZeroWithinVariance,
  TooFewGroups,
  OutOfRange,
  TooManyPredictors,
  NonPositiveSE,
  TooFewPermutations,
  // spe model
  MissingSentiment,
  NoUserUtterances,
  TooFewObservations,
  UnscoredEntries,
  IncompleteCv,
  // dynamics
  NotChatCondition,
  UnscoredUtterances,
  DegeneratePositions,
  TooFewConversations,
  UnscoredConversations,
  TooFewLaggedRows,
  ConstantSeries,
  // analyses
  MissingCondition,
  UnrankedTopics,
  IncompleteSimulation,
  // service
  UnknownCondition,
  ConversationOver,
  UpstreamFailure,
  NoActiveConversation,
  TooEarly,
  WrongCondition,
  WrongPhase,
  ActiveSessions,
  ReplyPending,
  NotFound,
  Unauthorized,
  // plumbing
  ConfigError,
  IoError,
  InvalidArgument,
};

std::string_view errc_name(Errc code) noexcept;

// Coarse grouping used for process exit codes and C API status values.
enum class ErrorCategory { config = 1, data = 2, upstream = 3, state = 4, io = 5, argument = 6 };

ErrorCategory errc_category(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, std::string detail = {})
      : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

  Errc code() const noexcept { return code_; }
  std::string_view name() const noexcept { return errc_name(code_); }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message, std::string detail = {}) {
  throw Error(code, message, std::move(detail));
}

}  // namespace wbl
