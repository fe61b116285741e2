from minlift.cli import main

raise SystemExit(main())
