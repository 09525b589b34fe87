#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace wbl {

enum class Condition { journal, chatbot };
enum class Role { topic_prompt, user, chatbot };
enum class ValenceGroup { positive, negative };
enum class Label { best, middle, worst };

std::string_view to_string(Condition c) noexcept;
std::string_view to_string(Role r) noexcept;
std::string_view to_string(ValenceGroup g) noexcept;
std::string_view to_string(Label l) noexcept;
std::optional<Condition> parse_condition(std::string_view s) noexcept;
std::optional<Role> parse_role(std::string_view s) noexcept;
std::optional<ValenceGroup> parse_valence_group(std::string_view s) noexcept;

using Provenance = std::map<std::string, std::string>;

struct Topic {
  std::string id;
  std::string prompt_text;
  bool in_journal = false;
  bool in_chatbot = false;
  std::optional<double> journal_mean_happiness;
  std::optional<int> rank;
  std::optional<ValenceGroup> valence_group;
  // Wording differs between conditions or the topic exists in only one of
  // them; condition comparisons skip it.
  bool excluded_from_comparison = false;

  bool available(Condition c) const noexcept { return c == Condition::journal ? in_journal : in_chatbot; }

  bool operator==(const Topic&) const = default;
};

using CovariateValue = std::variant<double, std::string>;

struct Participant {
  std::string id;
  Condition condition = Condition::journal;
  std::map<std::string, CovariateValue> covariates;

  bool operator==(const Participant&) const = default;
};

struct Utterance {
  std::string conversation_id;
  int index = 0;
  Role role = Role::user;
  std::string text;
  std::int64_t timestamp = 0;  // ms since session start
  std::optional<double> sentiment;

  bool operator==(const Utterance&) const = default;
};

struct Conversation {
  std::string id;
  std::string participant_id;
  std::string topic_id;
  Condition condition = Condition::journal;
  std::vector<Utterance> utterances;
  std::optional<double> happiness_post;
  std::int64_t started_at = 0;  // wall clock, ms since epoch
  std::int64_t ended_at = 0;
  // conversation-level role scores (concatenated text of each party)
  std::optional<double> user_role_sentiment;
  std::optional<double> chatbot_role_sentiment;
  Provenance provenance;

  std::vector<const Utterance*> user_utterances() const;
  bool operator==(const Conversation&) const = default;
};

struct Corpus {
  std::vector<Topic> topics;
  std::vector<Participant> participants;
  std::vector<Conversation> conversations;
  Provenance provenance;

  const Topic* find_topic(std::string_view id) const noexcept;
  const Participant* find_participant(std::string_view id) const noexcept;
  std::vector<const Conversation*> conversations_of(std::string_view participant_id) const;

  bool operator==(const Corpus&) const = default;
};

inline constexpr std::string_view kCorpusHeader = "#wbl-corpus v1";

// Covariate keys accepted on participants; gender is categorical, the rest numeric.
const std::set<std::string>& covariate_schema();

// Parses and validates the line-delimited corpus format. Validation is
// fail-fast: the first bad record aborts the load.
Corpus load_corpus(const std::filesystem::path& path);
Corpus parse_corpus(std::string_view text);

// Canonical text form: header, then topics, participants, conversations,
// one JSON object per line with sorted keys.
std::string export_corpus(const Corpus& corpus);
void validate_corpus(const Corpus& corpus);

// SHA-256 of the canonical export, hex encoded.
std::string corpus_fingerprint(const Corpus& corpus);

// --- text rules ---------------------------------------------------------

// Lowercases ASCII, splits on runs of non-alphanumeric bytes. Bytes >= 0x80
// count as alphanumeric so UTF-8 words stay whole.
std::vector<std::string> tokenize(std::string_view text);
const std::set<std::string>& default_stoplist();
std::size_t word_count(std::string_view text, const std::set<std::string>& stoplist);
inline std::size_t word_count(std::string_view text) { return word_count(text, default_stoplist()); }

// --- derived labels -----------------------------------------------------

// Journal mean happiness, rank (1 = happiest) and valence group for every
// comparable journal topic with ratings; everything else is left unranked.
std::vector<Topic> derive_topic_stats(const Corpus& corpus);
Corpus with_topic_stats(Corpus corpus);

std::map<std::string, Label> label_best_middle_worst(const Participant& participant, const Corpus& corpus);

// --- default catalog ----------------------------------------------------

std::vector<Topic> default_catalog();
std::string_view chatbot_system_prompt();
std::vector<std::string> catalog_ids(const std::vector<Topic>& catalog, Condition condition);

}  // namespace wbl
