use proptest::prelude::*;
use themex_core::{parse_ontology, Domain, ThemeOntology, ROOT_THEME};

/// Random ontology: the four domain roots under the root, then `parents[i]`
/// picks the parent of theme `i` among the themes created before it.
fn build(parents: &[usize]) -> ThemeOntology {
    let mut names: Vec<(String, Domain)> = Domain::ALL.iter().map(|d| (d.label().to_string(), *d)).collect();
    let mut src = format!("theme\tparent\tdomain\tdefinition\n{ROOT_THEME}\t\troot\t\n");
    for (name, d) in &names {
        src.push_str(&format!("{name}\t{ROOT_THEME}\t{d}\ttop\n"));
    }
    for (i, &pick) in parents.iter().enumerate() {
        let (parent, domain) = names[pick % names.len()].clone();
        let name = format!("t{i:03}");
        src.push_str(&format!("{name}\t{parent}\t{domain}\tdef {i}\n"));
        names.push((name, domain));
    }
    parse_ontology(&src).unwrap()
}

proptest! {
    #[test]
    fn ancestry_relations_are_consistent(parents in prop::collection::vec(0usize..1000, 0..60)) {
        let o = build(&parents);
        let mut total = 1;
        for top in o.descendants(ROOT_THEME).unwrap().iter().filter(|t| o.get(t).unwrap().parent.as_deref() == Some(ROOT_THEME)) {
            total += 1 + o.descendants(top).unwrap().len();
        }
        prop_assert_eq!(total, o.len());
        for a in o.themes() {
            let ancestors = o.ancestors(&a.name).unwrap();
            let descendants = o.descendants(&a.name).unwrap();
            prop_assert!(!ancestors.contains(&a.name.as_str()));
            prop_assert!(!descendants.contains(a.name.as_str()));
            for b in o.themes() {
                let a_above_b = o.ancestors(&b.name).unwrap().contains(&a.name.as_str());
                prop_assert_eq!(a_above_b, descendants.contains(b.name.as_str()));
            }
        }
    }

    #[test]
    fn render_round_trips(parents in prop::collection::vec(0usize..1000, 0..80)) {
        let o = build(&parents);
        let again = parse_ontology(&o.render()).unwrap();
        prop_assert!(again == o);
        prop_assert_eq!(again.render(), o.render());
    }

    #[test]
    fn stats_bounds(parents in prop::collection::vec(0usize..1000, 0..80)) {
        let o = build(&parents);
        let stats = o.stats();
        let counted: usize = stats.domains.iter().map(|d| d.theme_count).sum();
        prop_assert_eq!(counted + 1, o.len());
        for d in &stats.domains {
            prop_assert!(d.leaf_count <= d.theme_count);
        }
    }
}
