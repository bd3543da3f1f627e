#include "trollguard/synthetic.hpp"

#include <array>
#include <cmath>
#include <string>
#include <string_view>

#include "trollguard/random.hpp"

namespace trollguard::synthetic {
namespace {

template <std::size_t N>
std::string_view pick(Rng& rng, const std::array<std::string_view, N>& pool) {
  return pool[rng.below(N)];
}

constexpr std::array<std::string_view, 25> kTrollHashtags = {
    "ChinaLiedPeopleDied", "WHOliedPeopleDied", "ChinaHideAndPeopleDied", "ChinaVirus",
    "CCPvirus", "ShameOnChina", "ChinesePlague", "MakeChinaPay", "liftsanctionsoniran",
    "helpirancoronawhom", "TrumpPandemic", "TrumpVirus", "TrumpLiesAboutCoronavirus",
    "DiseaseFree_With_TrueWorship", "coronavirusstats", "CoronaVirusHoax", "DemocraticHoax",
    "CoronaVaccineHoax", "WarOnHumanity", "EnemyWithin", "DefenseProductionActNow", "BoycottChina",
    "PelosiHatesAmericans", "WuhanVirus", "ChineseVirus"};

constexpr std::array<std::string_view, 12> kTropePhrases = {
    "chloroquine has real efficacy and they hide it",
    "paracetamol is the medicine doctors will not admit works",
    "a russian scientist already proved it came from a lab",
    "they are culpable for every single death",
    "people who eat bats started all of this",
    "that man is a war criminal",
    "this virus was made in china",
    "their complicity in this genocide is obvious",
    "rape and torture is what this lockdown really is",
    "chloroquine works and the medical elite knows it",
    "the russian scientists warned us in january",
    "every death is culpable negligence by the elites",
};

constexpr std::array<std::string_view, 14> kTrollOpeners = {
    "Wake up people,", "Nobody will tell you this:", "The media hides it:", "Open your eyes!",
    "They lied again.", "Do your own research,", "Unbelievable.", "Share before they delete this:",
    "Still think it is an accident?", "Total disgrace.", "WAKE UP!", "Read this twice:",
    "The truth is out:", "Remember who did this:"};

constexpr std::array<std::string_view, 14> kTrollClaims = {
    "the lies from the elites are killing us",
    "this hoax is a plan to destroy our freedom",
    "they covered up the truth and people died",
    "the whole thing is propaganda and fraud",
    "corrupt officials knew and did nothing",
    "they want you scared and obedient",
    "the numbers are fake and the experts are liars",
    "the evil regime must pay for this",
    "shame on the traitors who let this happen",
    "criminals are running the response",
    "the cover up is bigger than you think",
    "our enemies planned this from day one",
    "the lies never stop",
    "the real virus is the corrupt media",
};

constexpr std::array<std::string_view, 8> kTrollClosers = {
    "Spread the word.", "Retweet before it is gone!", "They cannot silence us.",
    "Never forget.", "Make them pay.", "Enough is enough.", "Wake up!", "Share this!"};

// Sign-offs ordinary users append too.
constexpr std::array<std::string_view, 5> kSharedClosers = {
    "Spread the word.", "Share this!", "Please retweet.", "Stay safe.", "Thoughts?"};

constexpr std::array<std::string_view, 12> kNeutralHashtags = {
    "COVID19", "coronavirus", "StayHome", "StayHomeSaveLives", "FlattenTheCurve",
    "SocialDistancing", "WashYourHands", "pandemic", "covid19uk", "lockdown", "healthcare",
    "publichealth"};

constexpr std::array<std::string_view, 20> kNewsLines = {
    "Health officials confirm {n} new cases in {place} today",
    "{place} extends school closures for another {n} weeks",
    "Hospitals in {place} report {n} patients recovered this week",
    "New testing site opens in {place} with capacity for {n} tests a day",
    "@CDC updates guidance on masks for essential workers",
    "@WHO briefing: global case count passes {n} thousand",
    "Researchers in {place} begin vaccine trial with {n} volunteers",
    "Flights from China to {place} remain suspended until further notice",
    "President Trump to hold a press briefing at 5pm on the response",
    "Wuhan lifts lockdown after {n} days",
    "{place} governor announces {n} million for medical supplies",
    "Medical staff in {place} ask for more protective equipment",
    "Stock markets fall as {place} announces new restrictions",
    "Grocery stores in {place} set special hours for seniors",
    "Unemployment claims in {place} rise by {n} thousand",
    "Doctors in {place} warn against taking unproven drugs at home",
    "Chinese researchers publish genome data for international teams",
    "Local clinic in {place} now offers drive through testing",
    "{place} reports first day with no new deaths in {n} days",
    "The {place} health department publishes daily dashboard at noon",
};

constexpr std::array<std::string_view, 20> kPersonalLines = {
    "Day {n} of working from home and the cat has taken my chair",
    "Stay safe everyone, wash your hands and check on your neighbours",
    "So grateful for the nurses and doctors working long shifts",
    "Baked bread for the first time, it was actually good",
    "Missing my family so much, video calls help a little",
    "Please stay home if you can, it really helps the hospitals",
    "Our local shop is delivering to seniors for free, amazing people",
    "Terrible day, my aunt is in hospital and we cannot visit",
    "Honestly this lockdown is hard but we will get through it together",
    "Thank you to every delivery driver keeping things moving",
    "Kids learning from home means I am now a maths teacher apparently",
    "Went for a walk, the park was empty and the birds were loud",
    "Anyone know if the pharmacy on main street is open on sunday",
    "I hate not being able to hug my mum, this is so sad",
    "Feeling anxious today, reading too much news",
    "Donated blood today, the staff were wonderful",
    "Working night shifts at the hospital, tired but proud of the team",
    "My medicine delivery finally arrived, thanks to the pharmacist",
    "Cancelled our wedding, heartbroken but safety first",
    "Sewing masks for the care home down the road",
};

// Counter-speech and reporting that quote trolling hashtags; {tag} is filled
// with one of kTrollHashtags.
constexpr std::array<std::string_view, 12> kQuotingLines = {
    "Calling it {tag} is racist and it puts people in danger",
    "Please stop sharing {tag} posts, they are full of misinformation",
    "Why is {tag} trending? Read the actual science instead",
    "Reporters in {place} look at how {tag} spread online this week",
    "Fact check: claims behind {tag} are false according to doctors",
    "Muted everyone posting {tag} today, I need a break",
    "A study from {place} tracks {n} thousand accounts pushing {tag}",
    "My uncle keeps sending me {tag} videos, how do I talk to him",
    "Platforms say they will label tweets using {tag}",
    "Nurses in {place} respond to {tag} with photos from the ward",
    "Do not fall for {tag}, check trusted sources like your health department",
    "Teachers in {place} discuss {tag} with students as a media literacy lesson",
};

constexpr std::array<std::string_view, 16> kPlaces = {
    "Ohio", "London", "Madrid", "Lombardy", "New York", "Seoul", "Ontario", "Bavaria",
    "Texas", "Dublin", "Sydney", "Chicago", "Lagos", "Delhi", "Paris", "Oslo"};

std::string fill(std::string_view line, Rng& rng) {
  std::string out;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line.substr(i).starts_with("{n}")) {
      out += std::to_string(2 + rng.below(97));
      i += 2;
    } else if (line.substr(i).starts_with("{place}")) {
      out += pick(rng, kPlaces);
      i += 6;
    } else if (line.substr(i).starts_with("{tag}")) {
      out += "#";
      out += pick(rng, kTrollHashtags);
      i += 4;
    } else {
      out.push_back(line[i]);
    }
  }
  return out;
}

void add_hashtag(TweetRecord& rec, std::string_view tag) {
  for (const auto& existing : rec.hashtags) {
    if (existing == tag) return;
  }
  rec.hashtags.emplace_back(tag);
  rec.text += " #";
  rec.text += tag;
}

TweetKind troll_kind(Rng& rng) {
  const auto roll = rng.below(10);
  if (roll < 3) return TweetKind::Original;
  if (roll < 7) return TweetKind::Retweet;
  return TweetKind::Reply;
}

TweetKind normal_kind(Rng& rng) {
  const auto roll = rng.below(10);
  if (roll < 6) return TweetKind::Original;
  if (roll < 8) return TweetKind::Retweet;
  return TweetKind::Reply;
}

TweetRecord make_troll(Rng& rng) {
  TweetRecord rec;
  rec.kind = troll_kind(rng);
  rec.label = Label::Troll;
  rec.text = std::string(pick(rng, kTrollOpeners));
  // Half the trolls push a trope; all of them carry a claim and trolling hashtags.
  if (rng.below(2) == 0) {
    rec.text += " ";
    rec.text += pick(rng, kTropePhrases);
    rec.text += ".";
  }
  rec.text += " ";
  std::string claim(pick(rng, kTrollClaims));
  if (rng.below(4) == 0) {
    for (auto& c : claim) c = static_cast<char>(c >= 'a' && c <= 'z' ? c - 'a' + 'A' : c);
  }
  rec.text += claim;
  rec.text += ". ";
  rec.text += rng.below(3) == 0 ? pick(rng, kSharedClosers) : pick(rng, kTrollClosers);
  const std::size_t tags = 1 + rng.below(3);
  for (std::size_t i = 0; i < tags; ++i) add_hashtag(rec, pick(rng, kTrollHashtags));
  if (rng.below(2) == 0) add_hashtag(rec, pick(rng, kNeutralHashtags));
  return rec;
}

TweetRecord make_normal(Rng& rng) {
  TweetRecord rec;
  rec.kind = normal_kind(rng);
  rec.label = Label::NonTroll;
  const auto roll = rng.below(40);
  if (roll == 0) {
    rec.text = fill(pick(rng, kQuotingLines), rng);
    for (const auto& token : split_whitespace(rec.text)) {
      if (token.starts_with('#')) rec.hashtags.push_back(token.substr(1));
    }
  } else {
    rec.text = roll % 2 == 0 ? fill(pick(rng, kNewsLines), rng) : fill(pick(rng, kPersonalLines), rng);
  }
  if (rng.below(4) == 0) {
    rec.text += " ";
    rec.text += pick(rng, kSharedClosers);
  }
  if (rng.below(8) == 0) rec.text += " https://t.co/" + std::to_string(100000 + rng.below(900000));
  const std::size_t tags = rng.below(3);
  for (std::size_t i = 0; i < tags; ++i) add_hashtag(rec, pick(rng, kNeutralHashtags));
  return rec;
}

}  // namespace

std::vector<TweetRecord> generate_benchmark(const BenchmarkConfig& config) {
  Rng rng(derive_seed(config.seed, "synthetic-benchmark"));
  const auto trolls = static_cast<std::size_t>(std::llround(static_cast<double>(config.size) * config.troll_rate));
  std::vector<TweetRecord> out;
  out.reserve(config.size);
  for (std::size_t i = 0; i < config.size; ++i) {
    out.push_back(i < trolls ? make_troll(rng) : make_normal(rng));
  }
  for (std::size_t i = out.size(); i > 1; --i) std::swap(out[i - 1], out[rng.below(i)]);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].id = "s" + std::to_string(i + 1);
  return out;
}

}  // namespace trollguard::synthetic
