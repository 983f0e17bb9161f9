//! Bundled word lists for rendered datasets.

pub const PERSON_NAMES: &[&str] = &[
    "Alice", "Bob", "Carol", "David", "Emma", "Frank", "Grace", "Henry", "Irene", "Jack", "Karen", "Leo", "Maria",
    "Nathan", "Olivia", "Peter", "Quinn", "Rachel", "Simon", "Tina", "Victor", "Wendy", "Xavier", "Yvonne", "Zack",
    "Adam", "Bella", "Chris", "Diana", "Ethan", "Fiona", "George", "Hannah", "Isaac", "Julia", "Kevin", "Laura",
    "Mark", "Nina", "Oscar", "Paula", "Ryan", "Sarah", "Thomas", "Uma", "Vincent", "William", "Amy", "Brian",
    "Chloe", "Daniel", "Eric", "Felix", "Gina", "Hugo", "Ian", "Jenny", "Kyle", "Lucy", "Mike", "Nora", "Owen",
    "Pam", "Rose", "Sam", "Tom", "Vera", "Walter", "Alex", "Ben", "Cindy", "Dan", "Eva", "Fred", "Gary", "Helen",
    "Ivan", "Jane", "Kate", "Luke", "Mary", "Ned", "Paul", "Rita", "Steve", "Tony", "Wade", "Anna", "Bruce",
    "Clara", "Derek", "Ellen", "Frances", "Glen", "Holly", "James", "Jessica", "Keith", "Linda", "Martin", "Nancy",
    "Oliver", "Philip", "Robert", "Susan", "Terry", "Ursula", "Violet", "Warren", "Andrew", "Betty", "Charles",
    "Dorothy", "Edward", "Emily", "Gordon", "Heather", "Jennifer", "Joseph", "Lisa",
];

pub const RELATION_NAMES: &[&str] = &[
    "teacher", "instructor", "mentor", "boss", "friend", "neighbor", "doctor", "lawyer", "coach", "partner",
    "advisor", "manager", "colleague", "landlord", "tutor", "sponsor", "roommate", "supervisor", "assistant",
    "trainer",
];

pub const ANIMAL_NAMES: &[&str] = &[
    "Eyelash Viper", "Minke Whale", "Pelican", "Forest Mammoth", "Boomslang", "Gull", "Boxfish", "Dyeing Dart Frog",
    "Chinstrap Penguin", "Red Panda", "Snow Leopard", "Barn Owl", "Sea Otter", "Gray Wolf", "Fennec Fox", "Koala",
    "Axolotl", "Mandrill", "Narwhal", "Okapi", "Puffin", "Quokka", "Tapir", "Wombat", "Ibex", "Jaguar", "Kiwi",
    "Lemur", "Marmot", "Newt", "Ocelot", "Platypus", "Raven", "Stingray", "Toucan", "Vulture", "Walrus", "Yak",
    "Zebra Finch", "Anteater",
];

pub const PLACE_NAMES: &[&str] = &[
    "Mare Serenitatis", "Mare Imbrium", "Oceanus Procellarum", "Mare Tranquillitatis", "Mare Crisium",
    "Mare Nubium", "Mare Frigoris", "Mare Vaporum", "Mare Fecunditatis", "Mare Nectaris",
];
