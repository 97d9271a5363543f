//! Workloads shared by the benchmarks.

use morphounify_core::syntax::parse_desc;
use morphounify_core::Desc;

/// Every inflected form of the demo lexicon plus a few rejected strings.
pub const WORDS: &[&str] = &["rät", "rätst", "sagt", "sagst", "badet", "badest", "ratet", "bät"];

/// Partial word descriptions that determine a stem.
pub fn generation_specs() -> Vec<Desc> {
    ["rat", "sag", "bad"]
        .iter()
        .map(|s| parse_desc(&format!("word [morph: [stem: \"{s}\", mhead: [person: 3, tense: tense_pres]]]")).unwrap())
        .collect()
}

/// A fully specified word.
pub const RAT_WORD: &str = r#"
word [phon: "rät",
      morph: rightfunctor [mstring: "rAt+t", stem: #1 "rat", affix: "+t",
                           mhead: verb_form [epenthese: #3 '-', person: 3,
                                             tense: tense_pres, umlaut: #2 aou_umlaut],
                           arg: marg [mstring: "rAt", stem: #1,
                                      mhead: verb_stem [epenthese: #3, person: 3, umlaut: #2]]]]"#;
