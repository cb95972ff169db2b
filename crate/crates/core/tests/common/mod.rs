//! Shared `.ham` corpus and fuzz-case generation.

use std::fs;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn corpus() -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/corpus");
    let mut files: Vec<(PathBuf, String)> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "ham"))
        .map(|p| {
            let text = fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect();
    files.sort();
    files
}

const FRAGMENTS: &[&str] = &[
    "space", "param", "op", "tone", "omega", "=", "+", "-", "*", "(", ")", "[", "]", ",", "mat", "kron", "sx", "sp", "a", "adag",
    "proj", "q", "x", "g", "2", "0", "1.5", "2i", "1e400", "-3", "#", "\n", " ", "\t", "é", "$", ".", "..", "1e", "i", "(((", ")))",
];

fn mutate(rng: &mut ChaCha8Rng, text: &str) -> String {
    let mut chars: Vec<char> = text.chars().collect();
    for _ in 0..rng.gen_range(1..6) {
        if chars.is_empty() {
            break;
        }
        let at = rng.gen_range(0..chars.len());
        match rng.gen_range(0..4) {
            0 => {
                chars.remove(at);
            }
            1 => {
                let frag = FRAGMENTS[rng.gen_range(0..FRAGMENTS.len())];
                for (k, c) in frag.chars().enumerate() {
                    chars.insert(at + k, c);
                }
            }
            2 => {
                let end = (at + rng.gen_range(1..10)).min(chars.len());
                chars.drain(at..end);
            }
            _ => chars[at] = char::from(rng.gen_range(0x20u8..0x7f)),
        }
    }
    chars.into_iter().collect()
}

/// 200 deterministic inputs: mutated corpus files, token soup, random bytes and two deep-nesting cases.
pub fn fuzz_cases() -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let texts: Vec<String> = corpus().into_iter().map(|(_, t)| t).collect();
    let mut cases = Vec::with_capacity(200);
    for k in 0..198 {
        let case = match k % 4 {
            0 | 1 => {
                let pick = rng.gen_range(0..texts.len());
                mutate(&mut rng, &texts[pick])
            }
            2 => (0..rng.gen_range(0..40)).map(|_| FRAGMENTS[rng.gen_range(0..FRAGMENTS.len())]).collect::<Vec<_>>().join(" "),
            _ => {
                let bytes: Vec<u8> = (0..rng.gen_range(0..120)).map(|_| rng.gen()).collect();
                String::from_utf8_lossy(&bytes).into_owned()
            }
        };
        cases.push(case);
    }
    cases.push(format!("op x = {}1\n", "(".repeat(10_000)));
    cases.push(format!("op x = 1{}\n", " * 1".repeat(10_000)));
    cases
}
