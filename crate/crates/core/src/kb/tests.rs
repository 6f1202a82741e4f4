use super::*;
use crate::term::parse_term;

const BIRDS: &str = include_str!("../../data/birds.kb");
const HOME: &str = include_str!("../../data/home/home.kb");

fn lit(s: &str) -> Literal {
    Literal::from_term(&parse_term(s).unwrap()).unwrap()
}

fn birds() -> Taxonomy {
    Taxonomy::load(BIRDS).unwrap()
}

#[test]
fn loads_bird_taxonomy() {
    let kb = birds();
    assert_eq!(kb.classes().count(), 7);
    let ids: Vec<_> = kb.individuals().map(|i| i.id.as_str()).collect();
    assert_eq!(ids, ["pete", "arthur"]);
    assert!(Taxonomy::load("[class(top,none,[],[],[])]").is_ok());
}

#[test]
fn loads_home_kb() {
    let kb = Taxonomy::load(HOME).unwrap();
    for c in ["human", "object", "comestible", "food", "drink", "point"] {
        assert!(kb.class(c).is_some(), "{c}");
    }
}

#[test]
fn hierarchy_errors() {
    let cases = [
        "[class(animals,top,[],[],[])]",
        "[class(top,none,[],[],[]), class(a,b,[],[],[]), class(b,top,[],[],[])]",
        "[class(top,none,[],[],[]), class(a,top,[],[],[]), class(a,top,[],[],[])]",
        "[class(top,none,[],[],[]), class(a,top,[],[],[[id=>x,[],[]]]), class(b,top,[],[],[[id=>x,[],[]]])]",
    ];
    for c in cases {
        assert!(matches!(Taxonomy::load(c), Err(KbError::Hierarchy(_))), "{c}");
    }
    let mixed = "[class(top,none,[],[[tired=>>found_in=>home,1]],[])]";
    assert!(matches!(Taxonomy::load(mixed), Err(KbError::Clause(_))));
}

#[test]
fn bird_queries() {
    let kb = birds();
    let ask = |s, l| kb.ask(s, &lit(l)).unwrap();
    assert_eq!(ask("birds", "fly"), QueryAnswer::Yes);
    assert_eq!(ask("birds", "swim"), QueryAnswer::No);
    assert_eq!(ask("fish", "swim"), QueryAnswer::Unknown);
    assert_eq!(ask("penguins", "fly"), QueryAnswer::No);
    assert_eq!(ask("penguins", "swim"), QueryAnswer::Yes);
    assert_eq!(ask("arthur", "swim"), QueryAnswer::Yes);
    assert_eq!(ask("pete", "live=>argentina"), QueryAnswer::No);
    assert!(matches!(kb.ask("nobody", &lit("fly")), Err(KbError::UnknownSubject(_))));
}

#[test]
fn closures() {
    let kb = birds();
    let p = kb.resolve_closure("penguins").unwrap();
    assert!(p.contains(&lit("not(fly)")) && p.contains(&lit("swim")));
    assert!(!p.contains(&lit("fly")));
    assert!(kb.resolve_closure("pete").unwrap().contains(&lit("live=>mexico")));
    assert!(kb.resolve_closure("top").unwrap().is_empty());
}

#[test]
fn same_level_conflict() {
    let kb = Taxonomy::load("[class(top,none,[],[],[]), class(a,top,[[fly,1],[not(fly),1]],[],[])]").unwrap();
    assert!(matches!(kb.resolve_closure("a"), Err(KbError::SameLevelConflict { .. })));
    let kb = Taxonomy::load("[class(top,none,[],[],[]), class(a,top,[[fly,2],[not(fly),1]],[],[])]").unwrap();
    assert_eq!(kb.ask("a", &lit("fly")).unwrap(), QueryAnswer::No);
}

#[test]
fn extensions_and_profiles() {
    let kb = birds();
    let ids = |k| kb.extension_of(&k).unwrap().into_iter().map(|m| m.id).collect::<Vec<_>>();
    assert_eq!(ids(ExtensionKey::Class("top".into())), ["pete", "arthur"]);
    assert_eq!(ids(ExtensionKey::Property(lit("fly"))), ["pete"]);
    assert!(ids(ExtensionKey::Class("fish".into())).is_empty());
    assert_eq!(ids(ExtensionKey::Relation(lit("eat=>animals"))), ["pete"]);
    let why = kb.extension_of(&ExtensionKey::Explanation(lit("live=>X"))).unwrap();
    assert_eq!(why.len(), 1);
    assert_eq!(why[0].explanation.as_ref().unwrap().weight, 3);
    assert!(matches!(
        kb.extension_of(&ExtensionKey::Class("dragons".into())),
        Err(KbError::UnknownClass(_))
    ));

    assert_eq!(
        kb.profile_of_individual(ProfileKind::Classes, "pete").unwrap(),
        Profile::Classes(vec!["eagles".into(), "birds".into(), "animals".into(), "top".into()])
    );
    let Profile::Literals(props) = kb.profile_of_individual(ProfileKind::Properties, "arthur").unwrap() else {
        panic!()
    };
    assert!(props.contains(&lit("swim")) && props.contains(&lit("not(fly)")));
    let Profile::Literals(rels) = kb.profile_of_individual(ProfileKind::Relations, "pete").unwrap() else {
        panic!()
    };
    assert!(rels.contains(&lit("eat=>animals")));
    assert!(kb.profile_of_individual(ProfileKind::Classes, "birds").is_err());
}

#[test]
fn preferred_values_and_abduction() {
    let kb = birds();
    assert_eq!(kb.preferred_value("pete", "live", &[]).unwrap(), Some(parse_term("mexico").unwrap()));
    assert_eq!(kb.preferred_value("arthur", "live", &[]).unwrap(), None);
    let e = kb.abduce("pete", &lit("live=>mexico")).unwrap().unwrap();
    assert_eq!(e.antecedents, vec![lit("work=>mexico")]);
    assert_eq!(e.weight, 3);
    assert_eq!(kb.abduce("pete", &lit("colour=>red")).unwrap(), None);
}

#[test]
fn chained_defaults_find_the_user() {
    let kb = Taxonomy::load(HOME).unwrap();
    let known = [lit("bad_day"), lit("back_from_work"), lit("asked_comestible")];
    assert_eq!(
        kb.preferred_value("user", "found_in", &known).unwrap(),
        Some(parse_term("living_room").unwrap())
    );
    let lcd: Vec<ConditionalDefault> = kb
        .gathered_defaults("user")
        .unwrap()
        .into_iter()
        .map(|g| g.default)
        .collect();
    let out = chain_defaults(&known, &lcd);
    assert_eq!(&out[3..], &[lit("tired"), lit("found_in=>living_room"), lit("found_in=>dining_room")]);
    assert!(chain_defaults(&[], &[]).is_empty());
}

#[test]
fn forward_chaining_through_later_defaults() {
    // the antecedent of the first default is produced by a heavier one
    let lcd = vec![
        ConditionalDefault { antecedents: vec![lit("b")], consequent: lit("c") },
        ConditionalDefault { antecedents: vec![lit("a")], consequent: lit("b") },
    ];
    assert_eq!(chain_defaults(&[lit("a")], &lcd), vec![lit("a"), lit("c"), lit("b")]);
    let always = vec![ConditionalDefault { antecedents: vec![], consequent: lit("x") }];
    assert_eq!(chain_defaults(&[], &always), vec![lit("x")]);
}

#[test]
fn location_lists() {
    let mut kb = Taxonomy::load(HOME).unwrap();
    let locs = |kb: &Taxonomy| {
        kb.preferred_value_list("noodles", "loc", &[])
            .unwrap()
            .iter()
            .map(|t| t.to_string())
            .collect::<Vec<_>>()
    };
    assert_eq!(locs(&kb), ["shelf_food", "shelf_snacks", "shelf_drinks"]);
    kb = kb
        .update(UpdateOp::AssertClause, &parse_term("clause(noodles, [last_seen=>shelf_snacks, 0])").unwrap())
        .unwrap();
    assert_eq!(locs(&kb), ["shelf_snacks", "shelf_food", "shelf_drinks"]);
    let raw = kb.preferred_value_list_raw("noodles", "loc", &[]).unwrap();
    assert_eq!(raw.len(), 4);
}

#[test]
fn updates() {
    let kb = Taxonomy::load(HOME).unwrap();
    let kb2 = kb
        .update(UpdateOp::AssertClause, &parse_term("clause(coke, not(loc=>shelf_drinks))").unwrap())
        .unwrap();
    assert_eq!(kb2.ask("coke", &lit("loc=>shelf_drinks")).unwrap(), QueryAnswer::No);
    assert_eq!(kb2.preferred_value("coke", "loc", &[]).unwrap().unwrap().to_string(), "shelf_snacks");
    let kb3 = kb2
        .update(UpdateOp::RetractClause, &parse_term("clause(coke, not(loc=>shelf_drinks))").unwrap())
        .unwrap();
    assert_eq!(kb3, kb);

    let gone = kb.update(UpdateOp::RemoveClass, &parse_term("comestible").unwrap()).unwrap();
    assert!(gone.class("food").is_none() && gone.individual("malz").is_none());
    assert!(kb.update(UpdateOp::RemoveClass, &parse_term("top").unwrap()).is_err());
    assert!(matches!(
        kb.update(UpdateOp::RemoveIndividual, &parse_term("ghost").unwrap()),
        Err(KbError::UnknownTarget(_))
    ));
    let added = kb
        .update(UpdateOp::AddClass, &parse_term("class(snack, comestible)").unwrap())
        .unwrap()
        .update(UpdateOp::AddIndividual, &parse_term("individual(snack, crisps)").unwrap())
        .unwrap();
    assert_eq!(added.classes_of("crisps").unwrap()[..2], ["snack".to_string(), "comestible".to_string()]);
    let set = kb.update(UpdateOp::SetValue, &parse_term("set(malz, last_seen, shelf_food)").unwrap()).unwrap();
    assert_eq!(set.preferred_value("malz", "loc", &[]).unwrap().unwrap().to_string(), "shelf_food");
}

#[test]
fn dump_round_trips() {
    for text in [BIRDS, HOME] {
        let kb = Taxonomy::load(text).unwrap();
        let again = Taxonomy::load(&kb.dump()).unwrap();
        assert_eq!(again, kb);
    }
}
