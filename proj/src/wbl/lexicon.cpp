#include "wbl/sentiment.hpp"

namespace wbl {

// Small hand-built valence list for offline scoring. Not calibrated against
// any rater; bump kLexiconVersion when editing so caches are invalidated.
const std::map<std::string, double>& fallback_lexicon() {
  static const std::map<std::string, double> lexicon = {
      // positive
      {"accomplished", 0.7}, {"admire", 0.6}, {"adore", 0.8}, {"adventure", 0.5}, {"amazing", 0.9},
      {"appreciate", 0.7}, {"appreciated", 0.7}, {"awesome", 0.9}, {"beautiful", 0.8}, {"best", 0.8},
      {"better", 0.4}, {"blessed", 0.8}, {"brave", 0.5}, {"bright", 0.4}, {"calm", 0.5},
      {"care", 0.4}, {"caring", 0.6}, {"celebrate", 0.8}, {"cheerful", 0.8}, {"cherish", 0.8},
      {"comfort", 0.5}, {"comfortable", 0.5}, {"confident", 0.6}, {"content", 0.5}, {"cozy", 0.5},
      {"delight", 0.8}, {"ecstatic", 1.0}, {"delighted", 0.8}, {"delightful", 0.8}, {"enjoy", 0.7}, {"enjoyed", 0.7},
      {"encouraging", 0.6}, {"energized", 0.5}, {"excellent", 0.9}, {"excited", 0.7}, {"exciting", 0.7},
      {"fantastic", 0.9}, {"favorite", 0.6}, {"fine", 0.2}, {"fond", 0.5}, {"free", 0.3},
      {"friend", 0.4}, {"friends", 0.4}, {"fun", 0.7}, {"generous", 0.6}, {"gentle", 0.4},
      {"glad", 0.7}, {"good", 0.5}, {"grateful", 0.8}, {"gratitude", 0.7}, {"great", 0.8},
      {"grow", 0.3}, {"growth", 0.4}, {"happiness", 0.9}, {"happy", 0.9}, {"healthy", 0.5},
      {"helpful", 0.5}, {"hope", 0.5}, {"hopeful", 0.6}, {"incredible", 0.8}, {"inspired", 0.7},
      {"inspiring", 0.7}, {"joy", 0.9}, {"joyful", 0.9}, {"kind", 0.6}, {"kindness", 0.7},
      {"laugh", 0.7}, {"laughter", 0.7}, {"like", 0.3}, {"love", 0.9}, {"loved", 0.8},
      {"lovely", 0.8}, {"loving", 0.8}, {"lucky", 0.7}, {"meaningful", 0.6}, {"nice", 0.5},
      {"optimistic", 0.6}, {"peace", 0.6}, {"peaceful", 0.6}, {"perfect", 0.8}, {"pleasant", 0.6},
      {"pleased", 0.6}, {"positive", 0.6}, {"progress", 0.4}, {"proud", 0.7}, {"recover", 0.3},
      {"relaxed", 0.6}, {"relief", 0.5}, {"relieved", 0.5}, {"resilient", 0.5}, {"rewarding", 0.6},
      {"safe", 0.4}, {"satisfied", 0.6}, {"strength", 0.5}, {"strong", 0.5}, {"succeed", 0.6},
      {"success", 0.7}, {"successful", 0.7}, {"support", 0.5}, {"supportive", 0.6}, {"sweet", 0.5},
      {"thank", 0.6}, {"thankful", 0.8}, {"thanks", 0.5}, {"thrilled", 0.8}, {"thriving", 0.7},
      {"together", 0.3}, {"treasure", 0.7}, {"understanding", 0.4}, {"valuable", 0.5}, {"warm", 0.5},
      {"welcome", 0.4}, {"well", 0.3}, {"wonderful", 0.9}, {"worthwhile", 0.5}, {"yes", 0.2},
      // negative
      {"abandoned", -0.8}, {"afraid", -0.6}, {"alone", -0.5}, {"anger", -0.7}, {"angry", -0.7},
      {"annoyed", -0.5}, {"anxiety", -0.7}, {"anxious", -0.6}, {"ashamed", -0.7}, {"awful", -0.8},
      {"bad", -0.5}, {"betrayed", -0.8}, {"bitter", -0.6}, {"blame", -0.5}, {"bored", -0.3},
      {"broke", -0.5}, {"broken", -0.7}, {"burden", -0.6}, {"cried", -0.6}, {"cry", -0.6},
      {"critical", -0.4}, {"cruel", -0.8}, {"dead", -0.8}, {"death", -0.8}, {"depressed", -0.9},
      {"depression", -0.9}, {"despair", -0.9}, {"devastated", -1.0}, {"difficult", -0.4}, {"disappointed", -0.6}, {"disappointing", -0.6},
      {"dread", -0.7}, {"embarrassed", -0.6}, {"empty", -0.6}, {"exhausted", -0.5}, {"fail", -0.6},
      {"failed", -0.6}, {"failure", -0.7}, {"fear", -0.7}, {"frustrated", -0.6}, {"frustrating", -0.6},
      {"grief", -0.8}, {"guilt", -0.7}, {"guilty", -0.7}, {"hard", -0.3}, {"hate", -0.8},
      {"hopeless", -0.9}, {"horrible", -0.9}, {"hurt", -0.7}, {"hurtful", -0.7}, {"ignored", -0.6},
      {"insecure", -0.5}, {"jealous", -0.5}, {"lonely", -0.7}, {"lose", -0.5}, {"loss", -0.7},
      {"lost", -0.5}, {"mad", -0.6}, {"mean", -0.4}, {"miserable", -0.9}, {"miss", -0.3},
      {"mistake", -0.5}, {"mistakes", -0.5}, {"nervous", -0.5}, {"no", -0.2}, {"overwhelmed", -0.6},
      {"pain", -0.7}, {"painful", -0.7}, {"panic", -0.7}, {"poor", -0.4}, {"problem", -0.4},
      {"problems", -0.4}, {"regret", -0.7}, {"rejected", -0.7}, {"sad", -0.8}, {"sadness", -0.8},
      {"scared", -0.6}, {"selfish", -0.5}, {"shame", -0.7}, {"sick", -0.5}, {"sorry", -0.4},
      {"stress", -0.6}, {"stressed", -0.6}, {"stressful", -0.6}, {"struggle", -0.5}, {"struggling", -0.6},
      {"stuck", -0.5}, {"suffer", -0.7}, {"suffering", -0.7}, {"terrible", -0.9}, {"tired", -0.4},
      {"tough", -0.3}, {"trouble", -0.5}, {"ugly", -0.6}, {"unfair", -0.6}, {"unhappy", -0.8},
      {"upset", -0.6}, {"useless", -0.7}, {"weak", -0.4}, {"worried", -0.6}, {"worry", -0.5},
      {"worse", -0.6}, {"worst", -0.8}, {"worthless", -0.9}, {"wrong", -0.5},
  };
  return lexicon;
}

}  // namespace wbl
