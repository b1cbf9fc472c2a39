//! Render slots with the bundled phrase rules, and load a custom rule file.
use searchlearn::tabular::parse_mr;
use searchlearn::templates::RuleSet;

fn main() -> searchlearn::Result<()> {
    let e2e = RuleSet::e2e();
    let table = parse_mr("name[Zizzi], food[Thai], priceRange[£20-25], familyFriendly[no], area[city centre], near[Café Rouge]")?;
    for slot in table.slots() {
        println!("{:>16} -> {}", slot.name(), e2e.render(slot));
    }

    let wb = RuleSet::wikibio();
    let person = parse_mr("fullname[Ada Lovelace], birth place[London], occupation[mathematician]")?;
    for slot in person.slots() {
        println!("{:>16} -> {}", slot.name(), wb.render(slot));
    }

    let custom = RuleSet::parse("slot=venue; when=always; phrase=at {SV}\n")?;
    let t = parse_mr("venue[the docks]")?;
    println!("{:>16} -> {}", "venue", custom.render(&t.slots()[0]));
    Ok(())
}
