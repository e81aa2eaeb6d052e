// Score induced clusters against gold classes and rank-correlate vector
// similarities with human judgements.

use verb_transfer::clustering::ClusterAssignment;
use verb_transfer::embedding::{LanguageTag, Token, WordVectorStore};
use verb_transfer::evaluation::{evaluate, spearman_similarity, Denominator, GoldStandard, ScoredPair};

pub fn run_example() -> verb_transfer::Result<()> {
    let fr = LanguageTag::new("fr")?;
    let t = |w: &str| Token::new(&fr, w);
    let gold = GoldStandard::new([
        ("motion".to_string(), vec![t("courir")?, t("marcher")?, t("nager")?]),
        ("ingest".to_string(), vec![t("manger")?, t("boire")?]),
    ])?;
    let assignment = ClusterAssignment::new(
        vec![t("boire")?, t("courir")?, t("manger")?, t("marcher")?, t("nager")?],
        vec![1, 0, 1, 0, 1],
        2,
    )?;
    let report = evaluate(&assignment, &gold, None, Denominator::AllGold);
    println!("{}", report.to_json()?);

    let store = WordVectorStore::from_entries(
        2,
        [
            (t("courir")?, vec![1.0, 0.1]),
            (t("marcher")?, vec![0.9, 0.3]),
            (t("manger")?, vec![0.1, 1.0]),
        ],
    )?;
    let pairs = vec![
        ScoredPair {
            left: t("courir")?,
            right: t("marcher")?,
            score: 8.5,
        },
        ScoredPair {
            left: t("courir")?,
            right: t("manger")?,
            score: 1.0,
        },
        ScoredPair {
            left: t("marcher")?,
            right: t("manger")?,
            score: 2.0,
        },
        ScoredPair {
            left: t("marcher")?,
            right: t("voler")?,
            score: 3.0,
        },
    ];
    let rho = spearman_similarity(&store, &pairs)?;
    println!(
        "spearman rho = {:.3} over {} pairs ({} skipped)",
        rho.rho, rho.scored_pairs, rho.skipped_pairs
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> verb_transfer::Result<()> {
    run_example()
}
