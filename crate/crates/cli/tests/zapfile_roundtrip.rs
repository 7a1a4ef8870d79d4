use proptest::prelude::*;
use zap_cli::{parse_zap, write_zap};

fn arb_cycles(n: usize) -> impl Strategy<Value = String> {
    (Just((1..=n as i32).collect::<Vec<i32>>()).prop_shuffle(), proptest::collection::vec(any::<bool>(), n), 0..=n)
        .prop_map(move |(vars, flips, len)| {
            // one cycle; a signed cycle closes on itself with its negation
            let lits: Vec<String> = vars[..len]
                .iter()
                .zip(&flips)
                .map(|(&v, &f)| if f { (-v).to_string() } else { v.to_string() })
                .collect();
            format!("({})", lits.join(" "))
        })
}

fn arb_file() -> impl Strategy<Value = String> {
    (1usize..7).prop_flat_map(|n| {
        let clause = (
            proptest::sample::subsequence((1..=n as i32).collect::<Vec<_>>(), 0..=n),
            proptest::collection::vec(any::<bool>(), n),
            proptest::collection::vec(arb_cycles(n), 0..3),
            "[ ]{1,3}",
        )
            .prop_map(|(vars, signs, gens, pad)| {
                let mut lits: Vec<String> =
                    vars.iter().zip(&signs).map(|(&v, &s)| if s { (-v).to_string() } else { v.to_string() }).collect();
                lits.reverse();
                let mut text = format!("a{pad}{}{pad}0\n", lits.join(&pad));
                for g in gens {
                    text.push_str(&format!("g {g}\n"));
                }
                text
            });
        proptest::collection::vec(clause, 0..4).prop_map(move |cs| format!("c generated\n\np zap {n}\n{}", cs.concat()))
    })
}

proptest! {
    #[test]
    fn writing_is_idempotent(text in arb_file()) {
        let once = write_zap(&parse_zap(&text).unwrap());
        let twice = write_zap(&parse_zap(&once).unwrap());
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(parse_zap(&once).unwrap(), parse_zap(&text).unwrap());
    }
}
