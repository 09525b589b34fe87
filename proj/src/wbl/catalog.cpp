#include "wbl/corpus.hpp"

namespace wbl {

namespace {

Topic shared(std::string id, std::string prompt) {
  Topic t;
  t.id = std::move(id);
  t.prompt_text = std::move(prompt);
  t.in_journal = true;
  t.in_chatbot = true;
  return t;
}

}  // namespace

// Twelve topics worded identically in both conditions, the regret topic in
// its two wordings, and the chatbot-only childhood topic.
std::vector<Topic> default_catalog() {
  std::vector<Topic> topics = {
      shared("gratitude",
             "Think about the things in your life that you are very grateful for. What are some of those "
             "things and why are you grateful for them?"),
      shared("perfect_day",
             "What would be a \"perfect\" day for you? What activities would you do, who would you spend it "
             "with, etc."),
      shared("pride",
             "Talk about the things in your life that make you proud of yourself or increase your "
             "self-esteem."),
      shared("tv_show",
             "Talk about the best TV show or book you've seen or read in the last month. What did you like "
             "or dislike about it?"),
      shared("romance",
             "Talk about a romantic partner in your life (present or past). How did you meet this person "
             "and what was your relationship like?"),
      shared("self_critical",
             "Think about ways you are hard on yourself (e.g., overly critical, high standards, etc.). Talk "
             "about what those are and how you might offer yourself a bit more support."),
      shared("future_goals",
             "Think about something you wish you did on a daily basis. Describe what is holding you back "
             "from doing that and what steps you can take to start doing things differently."),
      shared("challenges",
             "Describe the hardest thing you have overcome in your life (e.g., challenges, difficulties)."),
      shared("evaluate_others",
             "Talk about a person you dislike. What characteristics does this person have, how do you wish "
             "that person would change and improve?"),
      shared("guilt",
             "Talk about a past situation where you did something that you felt guilty about. What "
             "happened, does this event still impact you currently, and have you forgiven yourself?"),
      shared("depression",
             "Describe a situation where you felt very low or depressed. What happened to make you feel "
             "that way?"),
      shared("hurt_feelings",
             "Talk about a time in which someone hurt your feelings deeply. What led up to this event, how "
             "did they make you feel, and what did you do in response?"),
  };

  Topic regret_journal;
  regret_journal.id = "regret_journal";
  regret_journal.prompt_text =
      "If you were to never see a close friend or family member again, what would you most regret not "
      "having told them? Why haven't you told them yet?";
  regret_journal.in_journal = true;
  regret_journal.excluded_from_comparison = true;
  topics.push_back(regret_journal);

  Topic regret_chatbot;
  regret_chatbot.id = "regret_chatbot";
  regret_chatbot.prompt_text =
      "If you were to never see a close friend again, what would you most regret not having told them?";
  regret_chatbot.in_chatbot = true;
  regret_chatbot.excluded_from_comparison = true;
  topics.push_back(regret_chatbot);

  Topic childhood;
  childhood.id = "childhood";
  childhood.prompt_text =
      "How close and warm is your family? Do you feel your childhood was happier than other's?";
  childhood.in_chatbot = true;
  childhood.excluded_from_comparison = true;
  topics.push_back(childhood);
  return topics;
}

std::string_view chatbot_system_prompt() {
  return "You are an empathic and therapeutic chatbot with your primary function being to facilitate "
         "dialogue. When users share their feelings, concerns, and challenges, try to ask them reflect and "
         "explore their emotions more deeply. Empathy is your guiding principle. Engage users as if they "
         "were confiding in a trusted therapist, and always prioritize their emotional well-being.\n\n"
         "The user will initiate the conversation based on a prompt. Your role is to engage in a "
         "productive dialogue for the user.";
}

std::vector<std::string> catalog_ids(const std::vector<Topic>& catalog, Condition condition) {
  std::vector<std::string> ids;
  for (const auto& t : catalog) {
    if (t.available(condition)) ids.push_back(t.id);
  }
  return ids;
}

}  // namespace wbl
