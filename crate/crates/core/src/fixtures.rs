//! Deterministic synthetic corpora for tests, demos and CI.
//!
//! Real diachronic text cannot ship with the repository, so acceptance
//! checks run on generated varieties with controlled structure: a
//! deterministic alternating pattern, a rich variety built as a superset of
//! an impoverished one, and a nested chain of varieties with shrinking
//! lexicons.

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, CorpusGroup, Document, Kind};

/// Twelve hand-written documents across six families of the bundled period
/// mapping, both kinds represented. Stable across releases: tests rely on
/// the exact contents.
pub fn demo_corpus() -> Vec<Document> {
    let mk = |author: &str, title: &str, collection: &str, family: &str, kind: Kind, text: &str| {
        Document {
            author: author.into(),
            title: title.into(),
            collection: collection.into(),
            family: family.into(),
            kind,
            text: text.into(),
        }
    };
    vec![
        mk(
            "Guido di Fiore",
            "Canzone della chiara riva",
            "Rime antiche",
            "Stilnovisti",
            Kind::Poetry,
            "Nel core mio fiorisce una dolce luce<EOL>che move il passo verso la chiara riva<EOL>e il vento canta parole gentili<EOS>",
        ),
        mk(
            "Lapo della Pietra",
            "Sonetto del fiume",
            "Rime nuove",
            "Stilnovisti",
            Kind::Poetry,
            "Lungo il fiume cammina il pensiero<EOL>dove l'acqua racconta sua ventura<EOS>",
        ),
        mk(
            "Giacomo del Mare",
            "Canto della corte",
            "Canzoniere di corte",
            "Sicilian School",
            Kind::Poetry,
            "Madonna mia vi porto nel pensare<EOL>si como face il marinaro stella<EOL>che per lo mare guida sua novella<EOS>",
        ),
        mk(
            "Giacomo del Mare",
            "Canto secondo",
            "Canzoniere di corte",
            "Sicilian School",
            Kind::Poetry,
            "Amore e core vanno per un mare<EOL>e l'onda porta il canto del mattino<EOS>",
        ),
        mk(
            "Francesco del Colle",
            "Sonetto della memoria",
            "Frammenti",
            "Petrarca",
            Kind::Poetry,
            "Solo e pensoso il colle mi riceve<EOL>e la memoria mide il passo lento<EOL>fra l'erba nova e l'ombra che si muove<EOS>",
        ),
        mk(
            "Francesco del Colle",
            "Lettera al amico lontano",
            "Epistole",
            "Petrarca",
            Kind::Prose,
            "Scrivo a voi, amico caro, da questo colle quieto. La quiete insegna misura al pensiero.<EOS>Il tempo passa come acqua e lascia semi di memoria nel campo nostro.<EOS>",
        ),
        mk(
            "Giovanni della Valle",
            "Novella della fortuna",
            "Cento racconti",
            "Boccaccio",
            Kind::Prose,
            "Dico dunque che nella valle visse un mercante di grande ingegno e poca fortuna.<EOS>Avvenne che la fortuna, mutando vento, gli rese in un giorno quanto aveva tolto in anni.<EOS>",
        ),
        mk(
            "Giovanni della Valle",
            "Ballata della brigata",
            "Cento racconti",
            "Boccaccio",
            Kind::Poetry,
            "La lieta brigata canta nel giardino<EOL>e ogni novella trova il suo cammino<EOS>",
        ),
        mk(
            "Ludovico del Bosco",
            "Racconto del cavaliere errante",
            "Storie del bosco",
            "Ariosto",
            Kind::Prose,
            "Il cavaliere errante lascia la rocca e segue un sentiero che nessuna carta mostra.<EOS>Di meraviglia in meraviglia il bosco muta, e con il bosco muta il suo disegno.<EOS>",
        ),
        mk(
            "Ludovico del Bosco",
            "Canto del palazzo incantato",
            "Storie del bosco",
            "Ariosto",
            Kind::Poetry,
            "Nel palazzo incantato gira il cavaliere<EOL>e ogni porta apre un nuovo sentiero<EOL>dove la maga nasconde il vero<EOS>",
        ),
        mk(
            "Torquato della Selva",
            "Canto della selva",
            "Canti della selva",
            "Tasso",
            Kind::Poetry,
            "Ne la gran selva il pellegrino armato<EOL>cerca la via che il cielo gli promise<EOL>e ode lontano un corno disperato<EOS>",
        ),
        mk(
            "Torquato della Selva",
            "Lettera dalla selva",
            "Epistole della selva",
            "Tasso",
            Kind::Prose,
            "Signore mio, la selva dove scrivo non conosce misura; vi crescono insieme ombra e canto.<EOS>Chiedo solo che la vostra corte ricordi il mio nome quando il corno tace.<EOS>",
        ),
    ]
}

/// Prose documents of a strictly alternating two-character pattern; the
/// archetypal learnable corpus (an ideal model approaches perplexity 1).
pub fn pattern_corpus(n_docs: usize, doc_len: usize) -> Vec<Document> {
    (0..n_docs)
        .map(|i| {
            let mut text = String::with_capacity(doc_len);
            for k in 0..doc_len {
                text.push(if k % 2 == 0 { 'a' } else { 'b' });
            }
            Document {
                author: "Alternatore".into(),
                title: format!("motivo {i:02}"),
                collection: "motivi".into(),
                family: "Pattern".into(),
                kind: Kind::Prose,
                text,
            }
        })
        .collect()
}

fn random_word(rng: &mut ChaCha8Rng, alphabet: &[char], len_range: (usize, usize)) -> String {
    let len = rng.random_range(len_range.0..=len_range.1);
    (0..len).map(|_| *alphabet.choose(rng).unwrap()).collect()
}

fn lexicon(
    rng: &mut ChaCha8Rng,
    alphabet: &[char],
    n_words: usize,
    len_range: (usize, usize),
) -> Vec<String> {
    let mut words = Vec::with_capacity(n_words);
    while words.len() < n_words {
        let w = random_word(rng, alphabet, len_range);
        if !words.contains(&w) {
            words.push(w);
        }
    }
    words
}

fn lexicon_documents(
    rng: &mut ChaCha8Rng,
    lexicon: &[String],
    family: &str,
    authors: &[&str],
    n_docs: usize,
    words_per_doc: usize,
    kind: Kind,
) -> Vec<Document> {
    (0..n_docs)
        .map(|i| {
            let mut text = String::new();
            for w in 0..words_per_doc {
                text.push_str(lexicon.choose(rng).unwrap());
                if kind == Kind::Poetry && (w + 1) % 6 == 0 && w + 1 < words_per_doc {
                    text.push_str("<EOL>");
                } else if w + 1 < words_per_doc {
                    text.push(' ');
                }
            }
            text.push_str("<EOS>");
            Document {
                author: authors[i % authors.len()].into(),
                title: format!("{family} {i:02}"),
                collection: format!("{family} collection"),
                family: family.into(),
                kind,
                text,
            }
        })
        .collect()
}

const FULL_ALPHABET: [char; 20] = [
    'a', 'b', 'c', 'd', 'e', 'f', 'g', 'h', 'i', 'j', 'k', 'l', 'm', 'n', 'o', 'p', 'q', 'r',
    's', 't',
];

/// A rich variety and an impoverished subset variety.
///
/// The simple group samples from a small lexicon over an 8-letter alphabet;
/// the rich group samples from a superset lexicon: every simple word plus
/// many novel words over the full 20-letter alphabet. A model of the simple
/// variety meets material it cannot explain when evaluated on the rich one,
/// while the rich model has seen everything the simple corpus offers.
pub fn rich_simple_groups(seed: u64) -> (CorpusGroup, CorpusGroup) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let simple_lex = lexicon(&mut rng, &FULL_ALPHABET[..8], 10, (3, 6));
    let mut rich_lex = simple_lex.clone();
    rich_lex.extend(lexicon(&mut rng, &FULL_ALPHABET, 30, (3, 8)));

    let simple_docs = lexicon_documents(
        &mut rng,
        &simple_lex,
        "Semplice",
        &["scriba-s1", "scriba-s2"],
        10,
        80,
        Kind::Prose,
    );
    let rich_docs = lexicon_documents(
        &mut rng,
        &rich_lex,
        "Ricca",
        &["scriba-r1", "scriba-r2"],
        10,
        80,
        Kind::Prose,
    );
    (
        CorpusGroup {
            name: "R".into(),
            families: vec!["Ricca".into()],
            documents: rich_docs,
        },
        CorpusGroup {
            name: "S".into(),
            families: vec!["Semplice".into()],
            documents: simple_docs,
        },
    )
}

/// Three nested varieties A ⊃ B ⊃ C: C's lexicon is contained in B's and
/// B's in A's. All three share one alphabet so that cross-variety surprise
/// reflects pattern overlap rather than vocabulary-size caps on the
/// smoothed fallback probability.
pub fn nested_groups(seed: u64) -> (CorpusGroup, CorpusGroup, CorpusGroup) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lex_c = lexicon(&mut rng, &FULL_ALPHABET[..18], 8, (3, 6));
    let mut lex_b = lex_c.clone();
    lex_b.extend(lexicon(&mut rng, &FULL_ALPHABET[..18], 10, (3, 7)));
    let mut lex_a = lex_b.clone();
    lex_a.extend(lexicon(&mut rng, &FULL_ALPHABET[..18], 14, (3, 7)));

    let mk_group = |rng: &mut ChaCha8Rng, name: &str, lex: &[String]| {
        let family = format!("Fam{name}");
        let authors = [format!("autore-{name}1"), format!("autore-{name}2")];
        let author_refs: Vec<&str> = authors.iter().map(String::as_str).collect();
        CorpusGroup {
            name: name.into(),
            families: vec![family.clone()],
            documents: lexicon_documents(rng, lex, &family, &author_refs, 8, 80, Kind::Prose),
        }
    };
    let a = mk_group(&mut rng, "A", &lex_a);
    let b = mk_group(&mut rng, "B", &lex_b);
    let c = mk_group(&mut rng, "C", &lex_c);
    (a, b, c)
}

/// Four synthetic diachronic groups (two families each, both kinds) plus
/// their family -> group mapping. Adjacent groups share most of their
/// lexicon, so nearer groups are nearer in distance.
pub fn four_group_corpus(seed: u64) -> (Vec<Document>, BTreeMap<String, String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let group_names = ["XIII", "XIV", "XV-XVI-1", "XV-XVI-2"];
    let family_names = [
        ["Famiglia Alfa", "Famiglia Beta"],
        ["Famiglia Gamma", "Famiglia Delta"],
        ["Famiglia Epsilon", "Famiglia Zeta"],
        ["Famiglia Eta", "Famiglia Theta"],
    ];
    // a drifting lexicon: each group keeps 8 of the previous group's words
    // and adds 6 of its own
    let mut lex = lexicon(&mut rng, &FULL_ALPHABET[..14], 14, (3, 6));
    let mut docs = Vec::new();
    let mut mapping = BTreeMap::new();
    for (g, group) in group_names.iter().enumerate() {
        if g > 0 {
            lex.drain(0..6);
            lex.extend(lexicon(&mut rng, &FULL_ALPHABET[..14], 6, (3, 6)));
        }
        for (f, family) in family_names[g].iter().enumerate() {
            mapping.insert(family.to_string(), group.to_string());
            let author_a = format!("autore-{group}-{f}a");
            let author_b = format!("autore-{group}-{f}b");
            let authors: Vec<&str> = vec![&author_a, &author_b];
            docs.extend(lexicon_documents(
                &mut rng,
                &lex,
                family,
                &authors,
                3,
                60,
                Kind::Poetry,
            ));
            docs.extend(lexicon_documents(
                &mut rng,
                &lex,
                family,
                &authors,
                2,
                60,
                Kind::Prose,
            ));
        }
    }
    (docs, mapping)
}

/// Serialize documents in the corpus record format.
pub fn to_record_lines(docs: &[Document]) -> String {
    Corpus::from_documents(docs.to_vec()).to_record_lines()
}
