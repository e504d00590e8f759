//! Pattern expressions against ground tree nodes, with agreement.

use diathesis::fs::{unify_node, Bindings, Feature, PatternBundle, TreeBundle, UnifyConfig, ValueExpr};

fn expr(s: &str) -> ValueExpr {
    s.parse().expect("expression")
}

fn main() {
    let config = UnifyConfig::default();
    let secreto = TreeBundle::new()
        .with(Feature::Cat, "sn")
        .with(Feature::Number, "s")
        .with(Feature::Person, "3")
        .with_sem(["Meaning"]);
    let labios = TreeBundle::new()
        .with(Feature::Cat, "sp")
        .with(Feature::Prep, "con")
        .with_sem(["BodyPart"]);
    let fue = TreeBundle::new()
        .with(Feature::Cat, "vser")
        .with(Feature::Number, "s")
        .with(Feature::Person, "3");
    let fueron = fue.clone().with(Feature::Number, "p");

    let cases = [
        ("cat=sn|prop", PatternBundle::new().with(Feature::Cat, expr("sn|prop")), &secreto),
        ("cat=!sn", PatternBundle::new().with(Feature::Cat, expr("!sn")), &secreto),
        ("sem=^Mean", PatternBundle::new().with(Feature::Sem, expr("^Mean")), &secreto),
        (
            "sp prep=con|por sem=Instrument",
            PatternBundle::new()
                .with(Feature::Cat, expr("sp"))
                .with(Feature::Prep, expr("con|por"))
                .with(Feature::Sem, expr("Instrument")),
            &labios,
        ),
    ];
    for (label, pattern, node) in cases {
        println!("{label:<32} -> {:?}", unify_node(&pattern, node, &Bindings::new(), &config));
    }

    // entidad and vaux share the agreement chain `i`
    let entidad = PatternBundle::new().with(Feature::Cat, expr("sn")).with_agr("i");
    let vaux = PatternBundle::new().with(Feature::Cat, expr("vser")).with_agr("i");
    let after_entidad = unify_node(&entidad, &secreto, &Bindings::new(), &config);
    let env = after_entidad.bindings().expect("entidad unifies").clone();
    println!("\nbindings after entidad: {:?}", env);
    println!("vaux on 'fue':    {:?}", unify_node(&vaux, &fue, &env, &config));
    println!("vaux on 'fueron': {:?}", unify_node(&vaux, &fueron, &env, &config));
}
