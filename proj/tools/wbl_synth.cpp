// Writes a synthetic corpus from the generator in wbl/synth.hpp.
#include <iostream>

#include "CLI11.hpp"
#include "wbl/app.hpp"
#include "wbl/synth.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic study corpus"};
  wbl::synth::Config cfg;
  std::string out = "-";
  std::string mode = "spe", sentiments = "targets";

  app.add_option("--seed", cfg.seed, "Generator seed");
  app.add_option("--journal", cfg.journal_participants, "Journal participants");
  app.add_option("--chatbot", cfg.chatbot_participants, "Chatbot participants");
  app.add_option("--mode", mode, "Happiness model")->check(CLI::IsMember({"spe", "additive"}));
  app.add_option("--sentiments", sentiments, "Stored sentiments")->check(CLI::IsMember({"targets", "lexicon", "none"}));
  app.add_flag("!--all-chatbot-topics", cfg.comparable_topics_only, "Draw chatbot topics from the whole catalog");
  app.add_flag("!--no-covariates", cfg.covariates);
  app.add_flag("!--no-role-scores", cfg.role_scores);
  app.add_option("--intercept", cfg.intercept);
  app.add_option("--beta-first", cfg.beta_first);
  app.add_option("--beta-middle", cfg.beta_middle);
  app.add_option("--beta-last", cfg.beta_last);
  app.add_option("--happiness-sd", cfg.happiness_sd);
  app.add_option("--subject-sd", cfg.subject_sd);
  app.add_option("--chatbot-boost", cfg.chatbot_boost);
  app.add_option("--boost-positive", cfg.boost_positive);
  app.add_option("--boost-negative", cfg.boost_negative);
  app.add_option("--out", out, "Output file, - for stdout");
  CLI11_PARSE(app, argc, argv);

  cfg.mode = mode == "spe" ? wbl::synth::HappinessMode::spe : wbl::synth::HappinessMode::additive;
  cfg.sentiments = sentiments == "targets"   ? wbl::synth::SentimentSource::targets
                   : sentiments == "lexicon" ? wbl::synth::SentimentSource::lexicon
                                             : wbl::synth::SentimentSource::none;
  try {
    const std::string text = wbl::export_corpus(wbl::synth::generate(cfg));
    if (out == "-") std::cout << text;
    else wbl::app::write_atomic(out, text);
  } catch (const wbl::Error& e) {
    std::cerr << "wbl_synth: " << e.name() << ": " << e.what() << "\n";
    return wbl::app::exit_code(wbl::errc_category(e.code()));
  }
  return 0;
}
