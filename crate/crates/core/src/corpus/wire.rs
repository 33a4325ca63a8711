//! Reproducible wire-style neutral headlines.
//!
//! A small phrase grammar in the register of agency news titles. It exists so
//! the full pipeline (ingest, synthesis, training, decoding) can run end to
//! end without a licensed news corpus; the output is written in the same
//! `title,text,subject,date` CSV layout that [`super::ingest_neutral_corpus`]
//! consumes.

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const ACTORS: &[&str] = &[
    "U.S. Senate", "House Republicans", "Trump", "Merkel", "EU lawmakers", "China's central bank",
    "Japan", "Brazil's Temer", "Pentagon", "White House", "Fed's Yellen", "Britain's May",
    "Mexico", "Canada", "Russia", "Turkish court", "Iraqi government", "South Korea",
    "Philippine police", "Germany's SPD", "French unions", "Spanish prosecutors",
    "Catalan leaders", "India's Modi", "Australian PM", "Nigerian army", "Saudi Arabia", "Iran",
    "Israel", "Egypt", "Venezuela's opposition", "Argentina", "Chile's president",
    "Kenya's election board", "Zimbabwe's ruling party", "Myanmar army", "Bangladesh",
    "Pakistan", "Afghan officials", "NATO", "U.N. Security Council", "World Bank", "IMF",
    "OPEC", "Lockheed Martin", "Boeing", "Apple", "Goldman Sachs", "Democrats",
    "Republican senators", "Kremlin", "Beijing", "Italian court", "Polish government",
    "Dutch parliament", "Greek lenders", "Swiss voters", "Irish regulator",
];

const ACTIONS: &[&str] = &[
    "approves", "rejects", "delays", "backs", "weighs", "urges", "announces", "criticizes",
    "defends", "signs", "blocks", "extends", "proposes", "scraps", "eyes", "unveils", "probes",
    "seeks", "pledges", "cuts", "raises", "reviews", "revives", "ends", "softens", "tightens",
];

const OBJECTS: &[&str] = &[
    "defense spending bill", "tax overhaul", "new sanctions on North Korea", "budget plan",
    "trade deal", "healthcare bill", "border security funding", "climate accord",
    "refugee quota", "election reform", "corruption probe", "oil output cap",
    "interest rates", "infrastructure plan", "arms sale", "ceasefire talks", "tariffs on steel",
    "immigration rules", "data privacy law", "pension reform", "coal subsidies", "banking rules",
    "nuclear deal", "fishing quotas", "minimum wage rise", "bank bailout", "fuel tax",
    "visa program", "debt ceiling plan", "farm subsidies", "military aid", "pipeline permit",
    "export ban", "fiscal target", "bond program", "antitrust case", "merger review",
];

const QUALIFIERS: &[&str] = &[
    "after talks", "amid protests", "ahead of vote", "despite opposition", "in close vote",
    "on Tuesday", "on Friday", "as deadline nears", "after court ruling", "amid budget dispute",
    ", sources say", ", statement says", ", officials say", ", report says", "for second time",
    "next week", "until March", "in bid to calm markets", "under pressure from allies",
];

const MARKETS: &[&str] = &[
    "Oil prices", "Dollar", "Gold", "Wall Street stocks", "European shares", "Bond yields",
    "Yen", "Copper", "Emerging markets", "Tech shares", "Euro", "Asian stocks", "Wheat futures",
    "Sterling", "Crude futures", "Bank shares",
];

const MOVES: &[&str] = &[
    "edge higher", "slip", "rally", "fall", "hold steady", "climb", "tumble", "recover", "dip",
    "extend gains", "ease",
];

const REASONS: &[&str] = &[
    "on supply concerns", "as Fed minutes weigh", "after jobs data", "on trade worries",
    "ahead of ECB meeting", "as investors eye tax bill", "on China demand",
    "after rate decision", "on geopolitical tension", "as earnings season starts",
    "on weak factory data", "after inflation report",
];

const COUNTS: &[&str] = &["Two", "Three", "Five", "Seven", "Ten", "At least 12", "Dozens", "Four"];

const EVENTS: &[&str] = &[
    "bomb blast", "clashes", "flooding", "bus crash", "landslide", "fire", "shooting",
    "air strike", "protests", "mine collapse", "ferry accident",
];

const PLACES: &[&str] = &[
    "Kabul", "Baghdad", "northern Nigeria", "Mogadishu", "eastern Congo", "Mindanao", "Karachi",
    "Cairo", "southern Yemen", "Caracas", "Dhaka", "Peshawar", "northern Mali", "Lagos",
    "central Myanmar", "Aleppo", "Nairobi", "Bogota", "Manila", "Quetta",
];

const SPEAKERS: &[&str] = &[
    "Tillerson", "Mattis", "Mnuchin", "Macron", "Juncker", "Abe", "Putin", "Erdogan",
    "Netanyahu", "Trudeau", "Pena Nieto", "Lavrov", "Guterres", "Draghi", "Kuroda",
];

const CLAIMS: &[&str] = &[
    "U.S. open to talks with North Korea", "no deal yet on budget", "sanctions will stay",
    "trade talks making progress", "growth outlook remains solid", "reform plan on track",
    "border dispute must end", "rates to stay low", "ceasefire holding in east",
    "election date unchanged", "refugee plan needs more funding", "ties with Washington strong",
    "inflation to pick up", "pipeline talks resume next month", "no plans to resign",
    "aid package coming soon", "new envoy to be named", "military drills to continue",
];

/// Generates `n` distinct headlines deterministically from `seed`.
pub fn wire_headlines(n: usize, seed: u64) -> Result<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while out.len() < n {
        attempts += 1;
        if attempts > n.saturating_mul(50).max(1000) {
            return Err(Error::invalid(format!("grammar cannot produce {n} distinct headlines")));
        }
        let h = headline(&mut rng);
        if seen.insert(h.clone()) {
            out.push(h);
        }
    }
    Ok(out)
}

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &[&'a str]) -> &'a str {
    pool.choose(rng).expect("non-empty pool")
}

fn headline(rng: &mut ChaCha8Rng) -> String {
    match rng.random_range(0..10) {
        0..=4 => {
            let mut h = format!("{} {} {}", pick(rng, ACTORS), pick(rng, ACTIONS), pick(rng, OBJECTS));
            if rng.random_bool(0.6) {
                let q = pick(rng, QUALIFIERS);
                if !q.starts_with(',') {
                    h.push(' ');
                }
                h.push_str(q);
            }
            h
        }
        5..=6 => format!("{} {} {}", pick(rng, MARKETS), pick(rng, MOVES), pick(rng, REASONS)),
        7 => format!("{} killed in {} in {}", pick(rng, COUNTS), pick(rng, EVENTS), pick(rng, PLACES)),
        _ => format!("{} says {}", pick(rng, SPEAKERS), pick(rng, CLAIMS)),
    }
}

/// Writes headlines in the `title,text,subject,date` layout.
pub fn write_wire_csv(headlines: &[String], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_wire_csv_to(headlines, file)
}

pub fn write_wire_csv_to<W: Write>(headlines: &[String], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["title", "text", "subject", "date"])?;
    for (i, h) in headlines.iter().enumerate() {
        let body = format!("(Wire) - {h}.");
        let date = format!("December {}, 2017", i % 28 + 1);
        w.write_record([h.as_str(), body.as_str(), "worldnews", date.as_str()])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
