use dialecto::arff::{read_arff, write_arff, AttributeKind, AttributeSpec, Dataset, Instance, Value};
use proptest::prelude::*;

const TEXT: &str = "[a-zA-Z0-9 ,'\"%{}?@\\\\\t\néèçàôÉ\u{0621}-\u{064A}]{0,10}";

fn unique(mut v: Vec<String>) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    v.retain(|s| seen.insert(s.clone()));
    v
}

fn attribute() -> impl Strategy<Value = AttributeKind> {
    prop_oneof![
        Just(AttributeKind::String),
        Just(AttributeKind::Numeric),
        prop::collection::vec(TEXT, 1..4).prop_map(|l| AttributeKind::Nominal(unique(l))),
    ]
}

fn value(kind: &AttributeKind) -> BoxedStrategy<Value> {
    let missing = Just(Value::Missing);
    match kind {
        AttributeKind::String => prop_oneof![4 => TEXT.prop_map(Value::Str), 1 => missing].boxed(),
        AttributeKind::Numeric => prop_oneof![
            4 => prop::num::f64::NORMAL.prop_map(Value::Num),
            2 => (-1000i32..1000).prop_map(|i| Value::Num(f64::from(i))),
            1 => missing,
        ]
        .boxed(),
        AttributeKind::Nominal(labels) => {
            prop_oneof![4 => (0..labels.len()).prop_map(Value::Label), 1 => missing].boxed()
        }
    }
}

fn instance(kinds: Vec<AttributeKind>) -> impl Strategy<Value = Instance> {
    let dense: Vec<BoxedStrategy<Value>> = kinds.iter().map(value).collect();
    let sparse: Vec<BoxedStrategy<Option<(usize, Value)>>> = kinds
        .iter()
        .enumerate()
        .map(|(i, k)| prop::option::of(value(k).prop_map(move |v| (i, v))).boxed())
        .collect();
    prop_oneof![
        dense.prop_map(Instance::Dense),
        sparse.prop_map(|e| Instance::Sparse(e.into_iter().flatten().collect())),
    ]
}

fn dataset() -> impl Strategy<Value = Dataset> {
    (TEXT, prop::collection::vec((TEXT, attribute()), 1..5))
        .prop_flat_map(|(relation, attrs)| {
            let mut names = std::collections::HashSet::new();
            let attrs: Vec<AttributeSpec> = attrs
                .into_iter()
                .enumerate()
                .map(|(i, (name, kind))| {
                    let name = if names.insert(name.clone()) {
                        name
                    } else {
                        format!("a{i}")
                    };
                    names.insert(name.clone());
                    AttributeSpec { name, kind }
                })
                .collect();
            let kinds: Vec<AttributeKind> = attrs.iter().map(|a| a.kind.clone()).collect();
            (
                Just(relation),
                Just(attrs),
                prop::collection::vec(instance(kinds), 0..8),
            )
        })
        .prop_map(|(relation, attrs, instances)| Dataset::from_parts(relation, attrs, instances).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn write_then_read_is_identity(ds in dataset()) {
        let text = write_arff(&ds);
        let back = read_arff(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&back, &ds);
        prop_assert_eq!(write_arff(&back), text);
    }

    #[test]
    fn reader_never_panics_on_bytes(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        let _ = read_arff(&String::from_utf8_lossy(&bytes));
    }

    #[test]
    fn reader_never_panics_on_mangled_arff(ds in dataset(), cut in 0usize..400, junk in "[@{},'\"%?\\\\ \n]{0,6}") {
        let mut text = write_arff(&ds);
        let at = text.char_indices().map(|(i, _)| i).nth(cut).unwrap_or(text.len());
        text.insert_str(at, &junk);
        let _ = read_arff(&text);
    }
}
